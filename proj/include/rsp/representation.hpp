#pragma once

#include <Eigen/Core>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rsp/common.hpp"
#include "rsp/tree.hpp"

namespace rsp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class RunMode { train, eval };

// Probability that a training token seen n times is replaced by <UNK>.
// Decreasing in n with infimum 1/10, so even common words are replaced
// often enough for the model to lean on the contextual component.
inline double unk_replace_probability(std::int64_t n) {
  require(n >= 0, "unk_replace_probability: negative count");
  double nd = static_cast<double>(n);
  return (1.0 + nd / 10.0) / (1.0 + nd);
}

struct WordVocab {
  static constexpr int kUnkId = 0;
  static constexpr const char* kUnkToken = "<UNK>";

  std::vector<std::string> tokens{kUnkToken};
  std::vector<std::int64_t> counts{0};
  std::map<std::string, int> index;

  int size() const { return static_cast<int>(tokens.size()); }

  int id_of(const std::string& token) const {
    auto it = index.find(token);
    return it == index.end() ? kUnkId : it->second;
  }

  std::int64_t count_of(const std::string& token) const {
    auto it = index.find(token);
    return it == index.end() ? 0 : counts[static_cast<std::size_t>(it->second)];
  }

  static WordVocab from_sentences(const std::vector<Sentence>& sentences) {
    std::map<std::string, std::int64_t> freq;
    for (const Sentence& s : sentences)
      for (const std::string& tok : s.tokens) ++freq[tok];
    std::vector<std::string> order;
    order.reserve(freq.size());
    for (const auto& [tok, count] : freq) order.push_back(tok);
    std::stable_sort(order.begin(), order.end(),
                     [&](const std::string& a, const std::string& b) {
                       return freq.at(a) > freq.at(b);
                     });
    WordVocab v;
    for (const std::string& tok : order) {
      v.index[tok] = v.size();
      v.tokens.push_back(tok);
      v.counts.push_back(freq.at(tok));
    }
    return v;
  }

  static WordVocab from_trees(const std::vector<Tree>& trees) {
    std::vector<Sentence> sentences;
    sentences.reserve(trees.size());
    for (const Tree& t : trees) sentences.push_back(sentence_of(t));
    return from_sentences(sentences);
  }
};

struct RepresentationConfig {
  enum class Mode { learned_only, contextual_file, hashed_context };

  int learned_dim = 16;
  int context_dim = 32;
  int context_layers = 3;
  Mode mode = Mode::hashed_context;
  std::uint64_t hash_seed = 1;  // stream for the hashed provider

  int input_dim() const {
    return learned_dim + (mode == Mode::learned_only ? 0 : context_dim);
  }
  int mix_size() const {
    return mode == Mode::learned_only ? 0 : context_layers;
  }
  void check() const {
    require(learned_dim >= 0 && context_dim >= 0, "negative dimension");
    require(input_dim() >= 1, "representation has zero total width");
    if (mode != Mode::learned_only)
      require(context_dim >= 1 && context_layers >= 1,
              "contextual mode needs context_dim and layers >= 1");
  }
};

// Per-sentence, per-token, per-layer vectors from a frozen source. Lookup is
// deterministic and safe for concurrent use after construction.
class ContextualProvider {
 public:
  virtual ~ContextualProvider() = default;
  virtual int layers() const = 0;
  virtual int dim() const = 0;
  // layers() matrices, each n x dim.
  virtual std::vector<Matrix> lookup(const Sentence& sentence) const = 0;
};

// Deterministic stand-in for a pretrained language model: layer 0 hashes the
// token type into a fixed vector, layer l > 0 averages layer-0 vectors over a
// +-l window, so higher layers depend on context.
class HashedContextualProvider final : public ContextualProvider {
 public:
  HashedContextualProvider(int dim, int layers, std::uint64_t seed)
      : dim_(dim), layers_(layers), seed_(seed) {
    require(dim >= 1 && layers >= 1, "hashed provider: bad dims");
  }

  int layers() const override { return layers_; }
  int dim() const override { return dim_; }

  std::vector<Matrix> lookup(const Sentence& sentence) const override {
    const int n = static_cast<int>(sentence.size());
    std::vector<Matrix> out(static_cast<std::size_t>(layers_));
    Matrix base(n, dim_);
    for (int t = 0; t < n; ++t) {
      std::uint64_t h =
          hash_string(sentence.tokens[static_cast<std::size_t>(t)], seed_);
      for (int d = 0; d < dim_; ++d) {
        std::uint64_t x = splitmix64(h ^ splitmix64(static_cast<std::uint64_t>(d)));
        base(t, d) = 2.0 * (static_cast<double>(x >> 11) * 0x1.0p-53) - 1.0;
      }
    }
    out[0] = base;
    for (int l = 1; l < layers_; ++l) {
      Matrix m(n, dim_);
      for (int t = 0; t < n; ++t) {
        int lo = std::max(0, t - l);
        int hi = std::min(n - 1, t + l);
        Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(dim_);
        for (int k = lo; k <= hi; ++k) acc += base.row(k);
        m.row(t) = acc / static_cast<double>(hi - lo + 1);
      }
      out[static_cast<std::size_t>(l)] = std::move(m);
    }
    return out;
  }

 private:
  int dim_;
  int layers_;
  std::uint64_t seed_;
};

// Vectors preloaded from the RSPCTX v1 text format, keyed by the exact
// space-joined token sequence.
class FileContextualProvider final : public ContextualProvider {
 public:
  FileContextualProvider(int dim, int layers,
                         std::map<std::string, std::vector<Matrix>> blocks)
      : dim_(dim), layers_(layers), blocks_(std::move(blocks)) {}

  int layers() const override { return layers_; }
  int dim() const override { return dim_; }

  std::vector<Matrix> lookup(const Sentence& sentence) const override {
    auto it = blocks_.find(sentence.joined());
    if (it == blocks_.end())
      fail("contextual file has no block for sentence: ", sentence.joined());
    return it->second;
  }

  std::size_t block_count() const { return blocks_.size(); }

 private:
  int dim_;
  int layers_;
  std::map<std::string, std::vector<Matrix>> blocks_;
};

// File layout:
//   RSPCTX v1 layers=<L> dim=<d>
//   # <space-joined tokens>
//   token<TAB>v1 v2 ... vd     (n lines for layer 0, then n for layer 1, ...)
//   <blank line between blocks>
inline std::shared_ptr<FileContextualProvider> load_contextual_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open contextual file: ", path);
  std::string line;
  if (!std::getline(in, line)) fail(path, ": empty contextual file");

  int layers = -1, dim = -1;
  {
    auto toks = split_ws(line);
    if (toks.size() != 4 || toks[0] != "RSPCTX" || toks[1] != "v1" ||
        toks[2].rfind("layers=", 0) != 0 || toks[3].rfind("dim=", 0) != 0)
      fail(path, ": bad header '", line, "'");
    try {
      layers = std::stoi(toks[2].substr(7));
      dim = std::stoi(toks[3].substr(4));
    } catch (...) {
      fail(path, ": bad header numbers");
    }
    require(layers >= 1 && dim >= 1, strcat(path, ": bad header dims"));
  }

  std::map<std::string, std::vector<Matrix>> blocks;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (split_ws(line).empty()) continue;
    if (line.rfind("# ", 0) != 0)
      fail(path, ":", lineno, ": expected block key line starting with '# '");
    std::string key = line.substr(2);
    std::vector<std::string> toks = split_ws(key);
    require(!toks.empty(), strcat(path, ":", lineno, ": empty sentence key"));
    key = "";
    for (std::size_t k = 0; k < toks.size(); ++k)
      key += (k ? " " : "") + toks[k];
    if (blocks.count(key))
      fail(path, ":", lineno, ": duplicate sentence key '", key, "'");

    const int n = static_cast<int>(toks.size());
    std::vector<Matrix> layer_mats(static_cast<std::size_t>(layers),
                                   Matrix(n, dim));
    for (int l = 0; l < layers; ++l) {
      for (int t = 0; t < n; ++t) {
        if (!std::getline(in, line))
          fail(path, ": truncated block for '", key, "'");
        ++lineno;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos)
          fail(path, ":", lineno, ": expected token<TAB>values");
        if (line.substr(0, tab) != toks[static_cast<std::size_t>(t)])
          fail(path, ":", lineno, ": token column mismatch ('",
               line.substr(0, tab), "' vs '",
               toks[static_cast<std::size_t>(t)], "')");
        std::istringstream vals(line.substr(tab + 1));
        for (int d = 0; d < dim; ++d) {
          double v;
          if (!(vals >> v))
            fail(path, ":", lineno, ": expected ", dim, " values");
          layer_mats[static_cast<std::size_t>(l)](t, d) = v;
        }
        double extra;
        if (vals >> extra) fail(path, ":", lineno, ": too many values");
      }
    }
    blocks.emplace(std::move(key), std::move(layer_mats));
  }
  return std::make_shared<FileContextualProvider>(dim, layers,
                                                  std::move(blocks));
}

inline void write_contextual_file(
    const std::string& path, int layers, int dim,
    const std::vector<std::pair<Sentence, std::vector<Matrix>>>& blocks) {
  std::ofstream out(path);
  if (!out) fail("cannot write contextual file: ", path);
  out << "RSPCTX v1 layers=" << layers << " dim=" << dim << "\n";
  char buf[64];
  for (const auto& [sentence, mats] : blocks) {
    require(mats.size() == static_cast<std::size_t>(layers),
            "write_contextual_file: layer count mismatch");
    out << "# " << sentence.joined() << "\n";
    for (const Matrix& m : mats) {
      require(m.rows() == static_cast<Eigen::Index>(sentence.size()) &&
                  m.cols() == dim,
              "write_contextual_file: block shape mismatch");
      for (Eigen::Index t = 0; t < m.rows(); ++t) {
        out << sentence.tokens[static_cast<std::size_t>(t)];
        out << '\t';
        for (Eigen::Index d = 0; d < m.cols(); ++d) {
          std::snprintf(buf, sizeof buf, "%.17g", m(t, d));
          out << (d ? " " : "") << buf;
        }
        out << '\n';
      }
    }
    out << '\n';
  }
}

// Builds a contextual file's blocks from another provider (handy for dumping
// the hashed provider into the documented format).
inline std::vector<std::pair<Sentence, std::vector<Matrix>>> provider_blocks(
    const ContextualProvider& provider, const std::vector<Sentence>& sents) {
  std::vector<std::pair<Sentence, std::vector<Matrix>>> out;
  out.reserve(sents.size());
  for (const Sentence& s : sents) out.push_back({s, provider.lookup(s)});
  return out;
}

// ---- scalar mix ----

inline Vector softmax(const Vector& v) {
  if (v.size() == 0) return v;
  double m = v.maxCoeff();
  Vector e = (v.array() - m).exp();
  return e / e.sum();
}

// scale * sum_l softmax(mix_weights)_l * layer_l, one row per token.
inline Matrix mix_layers_matrix(const std::vector<Matrix>& layers,
                                const Vector& mix_weights, double scale) {
  require(!layers.empty(), "mix_layers: no layers");
  require(mix_weights.size() == static_cast<Eigen::Index>(layers.size()),
          "mix_layers: weight/layer count mismatch");
  Vector alpha = softmax(mix_weights);
  Matrix out = Matrix::Zero(layers[0].rows(), layers[0].cols());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    require(layers[l].rows() == out.rows() && layers[l].cols() == out.cols(),
            "mix_layers: layer shape mismatch");
    out += alpha(static_cast<Eigen::Index>(l)) * layers[l];
  }
  return scale * out;
}

// Single-vector view of the same operation.
inline Vector mix_layers(const std::vector<Vector>& layers,
                         const Vector& mix_weights, double scale) {
  std::vector<Matrix> mats;
  mats.reserve(layers.size());
  for (const Vector& v : layers) mats.push_back(v.transpose());
  return mix_layers_matrix(mats, mix_weights, scale).row(0).transpose();
}

// Gradients of sum_ij d_out(i,j) * mixed(i,j) w.r.t. mix_weights and scale.
inline void mix_layers_backward(const std::vector<Matrix>& layers,
                                const Vector& mix_weights, double scale,
                                const Matrix& d_out, Vector& d_mix,
                                double& d_scale) {
  Vector alpha = softmax(mix_weights);
  Vector dot(alpha.size());
  for (std::size_t l = 0; l < layers.size(); ++l)
    dot(static_cast<Eigen::Index>(l)) =
        (d_out.array() * layers[l].array()).sum();
  d_scale += alpha.dot(dot);
  // softmax Jacobian: d_mix = scale * (alpha .* (dot - alpha'dot))
  double inner = alpha.dot(dot);
  d_mix += scale * (alpha.array() * (dot.array() - inner)).matrix();
}

}  // namespace rsp
