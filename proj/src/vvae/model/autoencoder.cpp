#include "vvae/model/autoencoder.hpp"

#include <fstream>

#include "vvae/core/tensor_io.hpp"
#include "vvae/model/config_json.hpp"

namespace vvae {

namespace {

template <typename T>
void check_pixel_range(const Tensor<T>& x) {
  for (std::int64_t i = 0; i < x.numel(); ++i) {
    const double v = double(x[i]);
    if (!(v >= -1.0 - 1e-5 && v <= 1.0 + 1e-5))
      throw input_error("encode: pixel values must lie in [-1, 1], found " +
                        std::to_string(v));
  }
}

constexpr char kArchiveMagic[4] = {'N', 'T', 'S', 'A'};

}  // namespace

template <typename T>
Autoencoder<T>::Autoencoder(const ModelConfig& cfg)
    : cfg_(cfg), w_(make_model_weights<T>(cfg)) {}

template <typename T>
Autoencoder<T>::Autoencoder(const ModelConfig& cfg, ModelWeights<Tensor<T>> w)
    : cfg_(cfg), w_(std::move(w)) {
  cfg_.validate();
}

template <typename T>
std::int64_t Autoencoder<T>::param_count() const {
  return vvae::param_count(w_);
}

template <typename T>
LatentGrid<T> Autoencoder<T>::encode(const Tensor<T>& x, EncodeMode mode,
                                     Rng* rng) const {
  check_pixel_range(x);
  PatchEmb<Tensor<T>> emb = patchify(x, w_.patch, cfg_);
  Tensor<T> p = encoder_forward(emb, w_.enc);
  const bool sampling = mode == EncodeMode::train &&
                        cfg_.bottleneck == BottleneckKind::cs;
  LatentHeads<Tensor<T>> heads = sense(p, w_.bneck, sampling, rng);
  LatentGrid<T> out;
  out.z = std::move(heads.z);
  if (heads.has_stats) {
    out.mu = std::move(heads.mu);
    out.logvar = std::move(heads.logvar);
    out.has_stats = true;
  }
  return out;
}

template <typename T>
Tensor<T> Autoencoder<T>::decode(const Tensor<T>& z) const {
  if (z.ndim() != 4 || z.shape().back() != cfg_.d)
    throw shape_error("decode: latent must be [1+T',H',W'," +
                      std::to_string(cfg_.d) + "], got " +
                      shape_str(z.shape()));
  Tensor<T> p = recover(z, w_.bneck);
  PatchEmb<Tensor<T>> emb = decoder_forward(p, w_.dec);
  return unpatchify(emb, w_.patch, cfg_);
}

template <typename T>
LatentGrid<T> Autoencoder<T>::encode_chunk(const Tensor<T>& chunk,
                                           StreamState<T>& ss) const {
  check_pixel_range(chunk);
  ss.begin_chunk();
  const bool leading = ss.chunks_done == 0;
  PatchEmb<Tensor<T>> emb = patchify(chunk, w_.patch, cfg_, leading);
  Tensor<T> p = encoder_forward(emb, w_.enc, &ss);
  LatentHeads<Tensor<T>> heads = sense(p, w_.bneck, false, nullptr);
  ss.end_chunk();
  LatentGrid<T> out;
  out.z = std::move(heads.z);
  if (heads.has_stats) {
    out.mu = std::move(heads.mu);
    out.logvar = std::move(heads.logvar);
    out.has_stats = true;
  }
  return out;
}

template <typename T>
Tensor<T> Autoencoder<T>::decode_chunk(const Tensor<T>& z,
                                       StreamState<T>& ss) const {
  if (z.ndim() != 4 || z.shape().back() != cfg_.d)
    throw shape_error("decode_chunk: bad latent shape " + shape_str(z.shape()));
  ss.begin_chunk();
  const bool leading = ss.chunks_done == 0;
  Tensor<T> p = recover(z, w_.bneck, &ss);
  PatchEmb<Tensor<T>> emb = decoder_forward(p, w_.dec, &ss);
  Tensor<T> x = unpatchify(emb, w_.patch, cfg_, leading);
  ss.end_chunk();
  return x;
}

template <typename T>
void Autoencoder<T>::save(const std::string& path) const {
  struct Entry {
    std::string name;
    Tensor<T>* t;
  };
  std::vector<Entry> entries;
  w_.for_each([&](const std::string& n, Tensor<T>& t) {
    entries.push_back({n, &t});
  });

  auto record_size = [](const Tensor<T>& t) {
    return std::int64_t(8) + 8 * t.ndim() + t.bytes();
  };

  nlohmann::json tensors = nlohmann::json::object();
  // Header: magic, version, dtype, u16 reserved, u64 manifest length.
  const std::int64_t header_size = 4 + 1 + 1 + 2 + 8;
  // Two passes: offsets depend on the manifest length, which depends on the
  // offsets' digits. Fix by padding the manifest with spaces to a stable
  // length computed from a first pass with worst-case 20-digit offsets.
  std::int64_t off = 0;
  for (const auto& e : entries) {
    nlohmann::json je;
    je["offset"] = 0;
    je["shape"] = e.t->shape();
    je["dtype"] = dtype_code<T>();
    tensors[e.name] = je;
    off += record_size(*e.t);
  }
  nlohmann::json manifest = {{"format", "ntsr-archive"},
                             {"version", 1},
                             {"dtype", dtype_code<T>()},
                             {"config", config_to_json(cfg_)},
                             {"tensors", tensors}};
  std::string probe = manifest.dump();
  const std::int64_t manifest_len =
      std::int64_t(probe.size()) + 24 * std::int64_t(entries.size());
  const std::int64_t blob_base = header_size + manifest_len;
  off = blob_base;
  for (const auto& e : entries) {
    manifest["tensors"][e.name]["offset"] = off;
    off += record_size(*e.t);
  }
  std::string body = manifest.dump();
  if (std::int64_t(body.size()) > manifest_len)
    throw io_error("checkpoint: manifest sizing bug");
  body.resize(std::size_t(manifest_len), ' ');

  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("checkpoint: cannot open for write: " + path);
  f.write(kArchiveMagic, 4);
  const unsigned char ver = 1, dt = dtype_code<T>();
  const unsigned char reserved[2] = {0, 0};
  f.write(reinterpret_cast<const char*>(&ver), 1);
  f.write(reinterpret_cast<const char*>(&dt), 1);
  f.write(reinterpret_cast<const char*>(reserved), 2);
  const std::uint64_t mlen = std::uint64_t(manifest_len);
  unsigned char lenb[8];
  for (int i = 0; i < 8; ++i) lenb[i] = (mlen >> (8 * i)) & 0xff;
  f.write(reinterpret_cast<const char*>(lenb), 8);
  f.write(body.data(), std::streamsize(body.size()));
  for (const auto& e : entries) write_ntsr(f, *e.t);
  if (!f) throw io_error("checkpoint: write failed: " + path);
}

template <typename T>
Autoencoder<T> Autoencoder<T>::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw input_error("checkpoint: cannot open: " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, kArchiveMagic, 4) != 0)
    throw input_error("checkpoint: bad magic");
  unsigned char ver = 0, dt = 0, reserved[2];
  f.read(reinterpret_cast<char*>(&ver), 1);
  f.read(reinterpret_cast<char*>(&dt), 1);
  f.read(reinterpret_cast<char*>(reserved), 2);
  if (!f) throw io_error("checkpoint: truncated header");
  if (ver != 1)
    throw config_error("checkpoint: unsupported version " +
                       std::to_string(ver));
  if (dt != dtype_code<T>())
    throw config_error("checkpoint: dtype mismatch (archive has code " +
                       std::to_string(dt) + ")");
  unsigned char lenb[8];
  f.read(reinterpret_cast<char*>(lenb), 8);
  if (!f) throw io_error("checkpoint: truncated header");
  std::uint64_t mlen = 0;
  for (int i = 0; i < 8; ++i) mlen |= std::uint64_t(lenb[i]) << (8 * i);
  std::string body(mlen, '\0');
  f.read(body.data(), std::streamsize(mlen));
  if (!f) throw io_error("checkpoint: truncated manifest");

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw input_error(std::string("checkpoint: bad manifest: ") + e.what());
  }
  const ModelConfig cfg = config_from_json(manifest.at("config"));
  ModelWeights<Tensor<T>> w(cfg);

  const auto& tensors = manifest.at("tensors");
  std::size_t consumed = 0;
  w.for_each([&](const std::string& name, Tensor<T>& t) {
    if (!tensors.contains(name))
      throw config_error("checkpoint: missing tensor: " + name);
    const auto& je = tensors.at(name);
    f.seekg(std::streamoff(je.at("offset").get<std::int64_t>()));
    Tensor<T> loaded = read_ntsr<T>(f);
    const std::vector<std::int64_t> want =
        je.at("shape").get<std::vector<std::int64_t>>();
    if (!same_shape(loaded.shape(), want))
      throw config_error("checkpoint: manifest/record shape mismatch for " +
                         name);
    t = std::move(loaded);
    ++consumed;
  });
  if (consumed != tensors.size())
    throw config_error("checkpoint: archive has " +
                       std::to_string(tensors.size()) +
                       " tensors, config expects " + std::to_string(consumed));

  // Shapes implied by the config must match what was stored.
  ModelWeights<Tensor<T>> ref = make_model_weights<T>(cfg);
  std::vector<std::vector<std::int64_t>> want_shapes;
  ref.for_each([&](const std::string&, Tensor<T>& t) {
    want_shapes.push_back(t.shape());
  });
  std::size_t i = 0;
  w.for_each([&](const std::string& name, Tensor<T>& t) {
    if (!same_shape(t.shape(), want_shapes.at(i++)))
      throw config_error("checkpoint: tensor " + name +
                         " has shape inconsistent with config");
  });

  return Autoencoder<T>(cfg, std::move(w));
}

template class Autoencoder<float>;
template class Autoencoder<double>;

}  // namespace vvae
