#include "clinx/serialize.hpp"

#include <bit>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

#include "clinx/errors.hpp"

namespace clinx {

namespace {

constexpr char kMagic[4] = {'C', 'L', 'N', 'X'};

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  put_u32(out, bits);
}

void put_string(std::string& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out += s;
}

void put_tensor(std::string& out, const Mat& m) {
  put_u32(out, 2);
  put_u32(out, static_cast<std::uint32_t>(m.rows));
  put_u32(out, static_cast<std::uint32_t>(m.cols));
  for (double x : m.a) put_f32(out, static_cast<float>(x));
}

void put_vector(std::string& out, const std::vector<double>& v) {
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(v.size()));
  for (double x : v) put_f32(out, static_cast<float>(x));
}

class Reader {
 public:
  Reader(const std::string& bytes, std::size_t pos, std::size_t end)
      : bytes_(bytes), pos_(pos), end_(end) {}

  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint8_t>(bytes_[pos_]) |
                      (static_cast<std::uint16_t>(
                           static_cast<std::uint8_t>(bytes_[pos_ + 1]))
                       << 8);
    pos_ += 2;
    return v;
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(
               static_cast<std::uint8_t>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  std::uint64_t u64() {
    std::uint64_t lo = u32();
    std::uint64_t hi = u32();
    return lo | (hi << 32);
  }

  float f32() {
    const std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }

  std::string str() {
    const std::uint32_t len = u32();
    need(len);
    std::string s = bytes_.substr(pos_, len);
    pos_ += len;
    return s;
  }

  Mat tensor() {
    if (u32() != 2) throw DataError("model container: expected rank-2 tensor");
    const std::uint32_t rows = u32();
    const std::uint32_t cols = u32();
    Mat m(rows, cols);
    for (double& x : m.a) x = static_cast<double>(f32());
    return m;
  }

  std::vector<double> vec() {
    if (u32() != 1) throw DataError("model container: expected rank-1 tensor");
    const std::uint32_t n = u32();
    std::vector<double> v(n);
    for (double& x : v) x = static_cast<double>(f32());
    return v;
  }

  std::size_t pos() const { return pos_; }
  bool at_end() const { return pos_ == end_; }

 private:
  void need(std::size_t n) {
    if (pos_ + n > end_) throw DataError("model container is truncated");
  }

  const std::string& bytes_;
  std::size_t pos_;
  std::size_t end_;
};

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_int(long long v) { return std::to_string(v); }

std::string vocab_payload(const Vocabulary& v) {
  std::string p;
  put_u32(p, static_cast<std::uint32_t>(v.items.size()));
  for (const auto& s : v.items) put_string(p, s);
  return p;
}

Vocabulary read_vocab(Reader& r, VocabKind kind) {
  Vocabulary v(kind);
  const std::uint32_t count = r.u32();
  if (count < 2) throw DataError("model container: vocabulary too small");
  v.items.clear();
  v.index.clear();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string s = r.str();
    v.index.emplace(s, i);
    v.items.push_back(std::move(s));
  }
  return v;
}

}  // namespace

std::string save_model(const ModelBundle& model) {
  check_shapes(model);
  std::string out;
  out.append(kMagic, 4);
  put_u16(out, ModelBundle::kFormatVersion);

  std::vector<std::pair<std::string, std::string>> sections;

  {
    std::string p;
    put_string(p, model.task);
    put_u32(p, static_cast<std::uint32_t>(model.labels.size()));
    for (const auto& l : model.labels) put_string(p, l);
    sections.emplace_back("TASK", p);
  }
  {
    const Hyperparams& hp = model.hp;
    const std::vector<std::pair<std::string, std::string>> kv = {
        {"window", format_int(hp.window)},
        {"kernel_width", format_int(hp.kernel_width)},
        {"filters", format_int(hp.filters)},
        {"hidden", format_int(hp.hidden)},
        {"token_dim", format_int(hp.token_dim)},
        {"pos_dim", format_int(hp.pos_dim)},
        {"shape_dim", format_int(hp.shape_dim)},
        {"keep_prob", format_double(hp.keep_prob)},
        {"norm_cap", format_double(hp.norm_cap)},
    };
    std::string p;
    put_u32(p, static_cast<std::uint32_t>(kv.size()));
    for (const auto& [k, v] : kv) {
      put_string(p, k);
      put_string(p, v);
    }
    sections.emplace_back("HYPR", p);
  }
  sections.emplace_back("VCTK", vocab_payload(model.vocabs.token));
  sections.emplace_back("VCPS", vocab_payload(model.vocabs.pos));
  sections.emplace_back("VCSH", vocab_payload(model.vocabs.shape));
  {
    std::string p;
    put_tensor(p, model.tables.token);
    sections.emplace_back("EMTK", p);
  }
  {
    std::string p;
    put_tensor(p, model.tables.pos);
    sections.emplace_back("EMPS", p);
  }
  {
    std::string p;
    put_tensor(p, model.tables.shape);
    sections.emplace_back("EMSH", p);
  }
  {
    std::string p;
    put_tensor(p, model.conv.filters);
    put_vector(p, model.conv.bias);
    sections.emplace_back("CONV", p);
  }
  {
    std::string p;
    put_tensor(p, model.mlp.weights);
    put_vector(p, model.mlp.bias);
    sections.emplace_back("MLPW", p);
  }
  {
    std::string p;
    put_tensor(p, model.soft.weights);
    put_vector(p, model.soft.bias);
    sections.emplace_back("SOFT", p);
  }
  if (model.tagger) {
    const TaggerModel& t = *model.tagger;
    std::string p;
    put_u32(p, static_cast<std::uint32_t>(t.tags.size()));
    for (const auto& tag : t.tags) put_string(p, tag);
    put_u64(p, t.weights.size());
    for (const auto& [feat, per_tag] : t.weights) {  // std::map: sorted order
      put_string(p, feat);
      put_u32(p, static_cast<std::uint32_t>(per_tag.size()));
      for (const auto& [tag_idx, w] : per_tag) {
        put_u32(p, tag_idx);
        put_f32(p, w);
      }
    }
    sections.emplace_back("TAGR", p);
  }

  put_u32(out, static_cast<std::uint32_t>(sections.size()));
  for (const auto& [tag, payload] : sections) {
    out.append(tag.data(), 4);
    put_u64(out, payload.size());
    out += payload;
  }
  return out;
}

ModelBundle load_model(const std::string& bytes) {
  if (bytes.size() < 6 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw DataError("model container: bad magic bytes");
  }
  Reader head(bytes, 4, bytes.size());
  const std::uint16_t version = head.u16();
  if (version != ModelBundle::kFormatVersion) {
    throw DataError("model container: unsupported format version " +
                    std::to_string(version));
  }
  const std::uint32_t section_count = head.u32();

  ModelBundle m;
  bool got_task = false, got_hyper = false, got_conv = false, got_mlp = false,
       got_soft = false;

  std::size_t pos = head.pos();
  for (std::uint32_t s = 0; s < section_count; ++s) {
    if (pos + 12 > bytes.size()) throw DataError("model container is truncated");
    const std::string tag = bytes.substr(pos, 4);
    Reader lr(bytes, pos + 4, bytes.size());
    const std::uint64_t len = lr.u64();
    const std::size_t payload_start = pos + 12;
    if (payload_start + len > bytes.size()) {
      throw DataError("model container is truncated");
    }
    Reader r(bytes, payload_start, payload_start + len);

    if (tag == "TASK") {
      m.task = r.str();
      const std::uint32_t n = r.u32();
      m.labels.clear();
      for (std::uint32_t i = 0; i < n; ++i) m.labels.push_back(r.str());
      got_task = true;
    } else if (tag == "HYPR") {
      const std::uint32_t n = r.u32();
      for (std::uint32_t i = 0; i < n; ++i) {
        const std::string k = r.str();
        const std::string v = r.str();
        if (k == "window") m.hp.window = std::stoi(v);
        else if (k == "kernel_width") m.hp.kernel_width = std::stoi(v);
        else if (k == "filters") m.hp.filters = std::stoi(v);
        else if (k == "hidden") m.hp.hidden = std::stoi(v);
        else if (k == "token_dim") m.hp.token_dim = std::stoi(v);
        else if (k == "pos_dim") m.hp.pos_dim = std::stoi(v);
        else if (k == "shape_dim") m.hp.shape_dim = std::stoi(v);
        else if (k == "keep_prob") m.hp.keep_prob = std::stod(v);
        else if (k == "norm_cap") m.hp.norm_cap = std::stod(v);
        else throw DataError("model container: unknown hyperparameter " + k);
      }
      got_hyper = true;
    } else if (tag == "VCTK") {
      m.vocabs.token = read_vocab(r, VocabKind::Token);
    } else if (tag == "VCPS") {
      m.vocabs.pos = read_vocab(r, VocabKind::Pos);
    } else if (tag == "VCSH") {
      m.vocabs.shape = read_vocab(r, VocabKind::Shape);
    } else if (tag == "EMTK") {
      m.tables.token = r.tensor();
    } else if (tag == "EMPS") {
      m.tables.pos = r.tensor();
    } else if (tag == "EMSH") {
      m.tables.shape = r.tensor();
    } else if (tag == "CONV") {
      m.conv.filters = r.tensor();
      m.conv.bias = r.vec();
      got_conv = true;
    } else if (tag == "MLPW") {
      m.mlp.weights = r.tensor();
      m.mlp.bias = r.vec();
      got_mlp = true;
    } else if (tag == "SOFT") {
      m.soft.weights = r.tensor();
      m.soft.bias = r.vec();
      got_soft = true;
    } else if (tag == "TAGR") {
      TaggerModel t;
      const std::uint32_t ntags = r.u32();
      for (std::uint32_t i = 0; i < ntags; ++i) t.tags.push_back(r.str());
      const std::uint64_t nfeat = r.u64();
      for (std::uint64_t i = 0; i < nfeat; ++i) {
        std::string feat = r.str();
        const std::uint32_t pairs = r.u32();
        auto& per_tag = t.weights[std::move(feat)];
        for (std::uint32_t j = 0; j < pairs; ++j) {
          const std::uint32_t tag_idx = r.u32();
          per_tag[tag_idx] = r.f32();
        }
      }
      t.finalized = true;
      m.tagger = std::move(t);
    } else {
      throw DataError("model container: unknown section '" + tag + "'");
    }
    pos = payload_start + len;
  }

  if (!(got_task && got_hyper && got_conv && got_mlp && got_soft)) {
    throw DataError("model container: missing required section");
  }
  check_shapes(m);
  return m;
}

void save_model_file(const ModelBundle& model, const std::string& path) {
  const std::string bytes = save_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open model file for writing: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("error writing model file: " + path);
}

ModelBundle load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading model file: " + path);
  return load_model(bytes);
}

namespace {

void round_f32(Mat& m) {
  for (double& x : m.a) x = static_cast<double>(static_cast<float>(x));
}

void round_f32(std::vector<double>& v) {
  for (double& x : v) x = static_cast<double>(static_cast<float>(x));
}

}  // namespace

void quantize_to_f32(ModelBundle& m) {
  round_f32(m.tables.token);
  round_f32(m.tables.pos);
  round_f32(m.tables.shape);
  round_f32(m.conv.filters);
  round_f32(m.conv.bias);
  round_f32(m.mlp.weights);
  round_f32(m.mlp.bias);
  round_f32(m.soft.weights);
  round_f32(m.soft.bias);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace clinx
