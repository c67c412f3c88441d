#include "tflab/weights.hpp"

#include "tflab/error.hpp"
#include "tflab/random.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace tflab {

namespace fs = std::filesystem;

namespace {

constexpr const char* kMagic = "TFLAB1";
constexpr int kVersion = 1;

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
  std::normal_distribution<double> normal(0.0, stddev);
  Matrix m(rows, cols);
  // Row-major fill order so the draw sequence matches the on-disk layout.
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

void LayerWeights::validate() const {
  const Eigen::Index d = output.rows();
  if (output.cols() != d || d == 0) {
    throw Error(ErrorKind::ShapeMismatch, "output matrix must be square, got " + shape_str(output));
  }
  if (heads.empty() || d % num_heads() != 0) {
    throw Error(ErrorKind::ShapeMismatch,
                std::to_string(heads.size()) + " heads do not divide d=" + std::to_string(d));
  }
  const Eigen::Index dk = d / num_heads();
  for (std::size_t h = 0; h < heads.size(); ++h) {
    for (const Matrix* m : {&heads[h].query, &heads[h].key, &heads[h].value}) {
      if (m->rows() != dk || m->cols() != d) {
        throw Error(ErrorKind::ShapeMismatch, "head " + std::to_string(h) + " block is " +
                                                  shape_str(*m) + ", expected " +
                                                  std::to_string(dk) + "x" + std::to_string(d));
      }
    }
  }
}

void ModelWeights::validate() const {
  if (layers.empty()) throw Error(ErrorKind::ShapeMismatch, "model has no layers");
  for (const auto& layer : layers) {
    layer.validate();
    if (layer.model_dim() != d || layer.num_heads() != heads) {
      throw Error(ErrorKind::ShapeMismatch, "layer " + std::to_string(layer.index) +
                                                " disagrees with model d/H");
    }
  }
}

double spectral_gap(const EigenSystem& es) {
  const auto n = es.size();
  if (n < 2) return 0.0;
  if (es.is_real(0)) return es.values[0].real() - es.values[1].real();
  if (n < 3) return 0.0;
  return es.values[0].real() - es.values[2].real();
}

Matrix value_stack(const LayerWeights& w) {
  w.validate();
  const Eigen::Index d = w.model_dim();
  const Eigen::Index dk = d / w.num_heads();
  Matrix stack(d, d);
  for (Eigen::Index h = 0; h < w.num_heads(); ++h) {
    stack.middleRows(h * dk, dk) = w.heads[static_cast<std::size_t>(h)].value;
  }
  return stack;
}

LayerMatrix make_layer_matrix(Matrix f) {
  LayerMatrix out;
  out.eigen = eig(f);
  out.f = std::move(f);
  out.spectral_gap = spectral_gap(out.eigen);
  return out;
}

LayerMatrix assemble_layer_matrix(const LayerWeights& w) {
  return make_layer_matrix(w.output * value_stack(w));
}

LayerWeights synthesize_symmetric(Eigen::Index d, const std::vector<double>& spectrum,
                                  std::uint64_t seed, double qk_scale) {
  if (d < 1 || static_cast<Eigen::Index>(spectrum.size()) != d) {
    throw Error(ErrorKind::InvalidSpectrum, "spectrum length must equal d");
  }
  const auto top = std::max_element(spectrum.begin(), spectrum.end());
  for (double s : spectrum) {
    if (!std::isfinite(s) || s == 0.0) {
      throw Error(ErrorKind::InvalidSpectrum, "spectrum entries must be finite and nonzero");
    }
  }
  if (*top <= 0.0) throw Error(ErrorKind::InvalidSpectrum, "largest eigenvalue must be positive");
  if (std::count(spectrum.begin(), spectrum.end(), *top) > 1) {
    throw Error(ErrorKind::InvalidSpectrum, "largest eigenvalue must be simple");
  }

  const Matrix q = random_orthogonal(d, mix_seed(seed, 0));
  Eigen::Map<const Vector> lambda(spectrum.data(), d);
  Matrix f = q * lambda.asDiagonal() * q.transpose();
  f = 0.5 * (f + f.transpose());

  Rng rng(mix_seed(seed, 1));
  const double qk_std = qk_scale / std::sqrt(static_cast<double>(d));
  LayerWeights layer;
  HeadWeights head;
  head.query = gaussian(d, d, qk_std, rng);
  head.key = gaussian(d, d, qk_std, rng);
  head.value = std::move(f);
  layer.heads.push_back(std::move(head));
  layer.output = Matrix::Identity(d, d);
  return layer;
}

ModelWeights synthesize_random(Eigen::Index d, Eigen::Index heads, Eigen::Index layers,
                               std::uint64_t seed, double scale, bool shared) {
  if (d < 1 || heads < 1 || d % heads != 0 || layers < 1) {
    throw Error(ErrorKind::ShapeMismatch, "need H | d and T >= 1");
  }
  if (!(scale > 0.0)) throw Error(ErrorKind::InvalidArgument, "scale must be positive");
  const Eigen::Index dk = d / heads;
  const double stddev = scale / std::sqrt(static_cast<double>(d));

  ModelWeights model;
  model.d = d;
  model.heads = heads;
  model.shared = shared;
  const Eigen::Index drawn = shared ? 1 : layers;
  for (Eigen::Index t = 0; t < drawn; ++t) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(t)));
    LayerWeights layer;
    layer.index = static_cast<int>(t);
    for (Eigen::Index h = 0; h < heads; ++h) {
      HeadWeights hw;
      hw.query = gaussian(dk, d, stddev, rng);
      hw.key = gaussian(dk, d, stddev, rng);
      hw.value = gaussian(dk, d, stddev, rng);
      layer.heads.push_back(std::move(hw));
    }
    layer.output = gaussian(d, d, stddev, rng);
    model.layers.push_back(std::move(layer));
  }
  for (Eigen::Index t = drawn; t < layers; ++t) {
    LayerWeights copy = model.layers.front();
    copy.index = static_cast<int>(t);
    model.layers.push_back(std::move(copy));
  }
  return model;
}

ModelWeights replicate_layer(const LayerWeights& layer, Eigen::Index layers) {
  layer.validate();
  ModelWeights model;
  model.d = layer.model_dim();
  model.heads = layer.num_heads();
  model.shared = true;
  for (Eigen::Index t = 0; t < layers; ++t) {
    LayerWeights copy = layer;
    copy.index = static_cast<int>(t);
    model.layers.push_back(std::move(copy));
  }
  return model;
}

// ---------------------------------------------------------------------------
// Container I/O

namespace {

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xFFu) << (8 * (7 - i));
    return r;
  }
  return v;
}

void write_matrix(const Matrix& m, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(m(i, j)));
      char bytes[8];
      std::memcpy(bytes, &bits, 8);
      out.write(bytes, 8);
    }
  }
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

Matrix read_matrix(const fs::path& path, Eigen::Index rows, Eigen::Index cols) {
  std::error_code ec;
  const auto size = fs::file_size(path, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot stat " + path.string());
  const auto expected = static_cast<std::uintmax_t>(rows * cols) * 8u;
  if (size != expected) {
    throw Error(ErrorKind::FormatError, path.filename().string() + " holds " +
                                            std::to_string(size) + " bytes, expected " +
                                            std::to_string(expected));
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      char bytes[8];
      if (!in.read(bytes, 8)) throw Error(ErrorKind::FormatError, "truncated " + path.string());
      std::uint64_t bits = 0;
      std::memcpy(&bits, bytes, 8);
      m(i, j) = std::bit_cast<double>(to_little_endian(bits));
    }
  }
  return m;
}

std::string head_key(std::size_t t, std::size_t h, const char* part) {
  return "L" + std::to_string(t) + ".H" + std::to_string(h) + "." + part;
}

std::string output_key(std::size_t t) { return "L" + std::to_string(t) + ".output"; }

std::string file_for(const std::string& key) {
  std::string name = key;
  std::replace(name.begin(), name.end(), '.', '_');
  return name + ".bin";
}

Eigen::Index parse_count(const std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw Error(ErrorKind::FormatError, "manifest lacks '" + key + "'");
  try {
    std::size_t used = 0;
    const long long v = std::stoll(it->second, &used);
    if (used != it->second.size() || v < 0) throw std::invalid_argument(key);
    return static_cast<Eigen::Index>(v);
  } catch (const std::exception&) {
    throw Error(ErrorKind::FormatError, "manifest value for '" + key + "' is not a count");
  }
}

}  // namespace

void save_model(const ModelWeights& w, const fs::path& dir) {
  w.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string());

  std::ostringstream manifest;
  manifest << "magic " << kMagic << "\n"
           << "version " << kVersion << "\n"
           << "d " << w.d << "\n"
           << "heads " << w.heads << "\n"
           << "layers " << w.num_layers() << "\n"
           << "shared " << (w.shared ? 1 : 0) << "\n";
  for (std::size_t t = 0; t < w.layers.size(); ++t) {
    const std::size_t src = w.shared ? 0 : t;
    const auto& layer = w.layers[src];
    for (std::size_t h = 0; h < layer.heads.size(); ++h) {
      const std::pair<const char*, const Matrix*> parts[] = {
          {"query", &layer.heads[h].query},
          {"key", &layer.heads[h].key},
          {"value", &layer.heads[h].value}};
      for (const auto& [name, m] : parts) {
        const std::string file = file_for(head_key(src, h, name));
        if (t == src) write_matrix(*m, dir / file);
        manifest << head_key(t, h, name) << " " << file << "\n";
      }
    }
    const std::string file = file_for(output_key(src));
    if (t == src) write_matrix(layer.output, dir / file);
    manifest << output_key(t) << " " << file << "\n";
  }

  std::ofstream out(dir / "manifest.txt", std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write manifest in " + dir.string());
  out << manifest.str();
  if (!out) throw Error(ErrorKind::IoError, "manifest write failed");
}

ModelWeights load_model(const fs::path& dir) {
  std::ifstream in(dir / "manifest.txt");
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + (dir / "manifest.txt").string());

  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string key, value, extra;
    if (!(fields >> key >> value) || (fields >> extra)) {
      throw Error(ErrorKind::FormatError, "bad manifest line '" + line + "'");
    }
    if (!kv.emplace(key, value).second) {
      throw Error(ErrorKind::FormatError, "duplicate manifest key '" + key + "'");
    }
  }
  if (kv["magic"] != kMagic) throw Error(ErrorKind::FormatError, "bad magic");
  if (parse_count(kv, "version") != kVersion) {
    throw Error(ErrorKind::FormatError, "unsupported container version");
  }

  ModelWeights w;
  w.d = parse_count(kv, "d");
  w.heads = parse_count(kv, "heads");
  const Eigen::Index layers = parse_count(kv, "layers");
  const Eigen::Index shared = parse_count(kv, "shared");
  if (w.d < 1 || w.heads < 1 || w.d % w.heads != 0 || layers < 1 || shared > 1) {
    throw Error(ErrorKind::FormatError, "inconsistent d/heads/layers/shared in manifest");
  }
  w.shared = shared == 1;
  const Eigen::Index dk = w.d / w.heads;

  auto file_of = [&](const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw Error(ErrorKind::FormatError, "manifest lacks '" + key + "'");
    const fs::path p(it->second);
    if (p.has_parent_path() || p.is_absolute()) {
      throw Error(ErrorKind::FormatError, "matrix file must live in the container directory");
    }
    return dir / p;
  };

  std::map<fs::path, Matrix> cache;
  auto load = [&](const std::string& key, Eigen::Index rows, Eigen::Index cols) {
    const fs::path p = file_of(key);
    auto it = cache.find(p);
    if (it == cache.end()) it = cache.emplace(p, read_matrix(p, rows, cols)).first;
    if (it->second.rows() != rows || it->second.cols() != cols) {
      throw Error(ErrorKind::FormatError, "file reused with a different shape");
    }
    return it->second;
  };

  for (Eigen::Index t = 0; t < layers; ++t) {
    LayerWeights layer;
    layer.index = static_cast<int>(t);
    const auto tt = static_cast<std::size_t>(t);
    for (Eigen::Index h = 0; h < w.heads; ++h) {
      const auto hh = static_cast<std::size_t>(h);
      HeadWeights hw;
      hw.query = load(head_key(tt, hh, "query"), dk, w.d);
      hw.key = load(head_key(tt, hh, "key"), dk, w.d);
      hw.value = load(head_key(tt, hh, "value"), dk, w.d);
      layer.heads.push_back(std::move(hw));
    }
    layer.output = load(output_key(tt), w.d, w.d);
    w.layers.push_back(std::move(layer));
  }

  if (w.shared) {
    for (const auto& layer : w.layers) {
      if (!bitwise_equal(layer.output, w.layers.front().output)) {
        throw Error(ErrorKind::FormatError, "shared flag set but layers differ");
      }
      for (std::size_t h = 0; h < layer.heads.size(); ++h) {
        const auto& a = layer.heads[h];
        const auto& b = w.layers.front().heads[h];
        if (!bitwise_equal(a.query, b.query) || !bitwise_equal(a.key, b.key) ||
            !bitwise_equal(a.value, b.value)) {
          throw Error(ErrorKind::FormatError, "shared flag set but layers differ");
        }
      }
    }
  }
  return w;
}

bool bitwise_equal(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return a.size() == 0 ||
         std::memcmp(a.data(), b.data(), static_cast<std::size_t>(a.size()) * sizeof(double)) == 0;
}

bool bitwise_equal(const ModelWeights& a, const ModelWeights& b) {
  if (a.d != b.d || a.heads != b.heads || a.shared != b.shared ||
      a.layers.size() != b.layers.size()) {
    return false;
  }
  for (std::size_t t = 0; t < a.layers.size(); ++t) {
    const auto& x = a.layers[t];
    const auto& y = b.layers[t];
    if (x.heads.size() != y.heads.size() || !bitwise_equal(x.output, y.output)) return false;
    for (std::size_t h = 0; h < x.heads.size(); ++h) {
      if (!bitwise_equal(x.heads[h].query, y.heads[h].query) ||
          !bitwise_equal(x.heads[h].key, y.heads[h].key) ||
          !bitwise_equal(x.heads[h].value, y.heads[h].value)) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace tflab
