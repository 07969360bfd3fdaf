#include "topicstream/lda.hpp"

#include <cmath>
#include <fstream>

#include "topicstream/error.hpp"

namespace topicstream {

using nlohmann::json;

namespace {

constexpr int kCheckpointVersion = 1;

std::vector<double> RowSums(const RealMatrix& m) {
  std::vector<double> sums(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (double x : m.row(r)) sums[r] += x;
  }
  return sums;
}

}  // namespace

PriorSpec PriorSpec::Symmetric(std::size_t topics, std::size_t vocab_size,
                               double alpha, double beta) {
  return {alpha, RealMatrix(topics, vocab_size, beta)};
}

void PriorSpec::Validate(double epsilon_floor) const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw ValidationError("prior: alpha must be finite and >= 0");
  }
  for (double b : beta.data()) {
    if (!(b >= epsilon_floor) || !std::isfinite(b) || b <= 0.0) {
      throw ValidationError("prior: beta entries must be finite and >= floor");
    }
  }
}

TopicModelState InitState(std::span<const ProcessedDoc> docs,
                          const PriorSpec& priors, std::uint64_t seed) {
  const std::size_t k_topics = priors.topics();
  const std::size_t vocab = priors.vocab_size();
  if (k_topics < 2) throw ValidationError("lda: K must be at least 2");
  if (docs.empty()) throw ValidationError("lda: empty corpus");

  TopicModelState state;
  state.seed = seed;
  state.rng.seed(seed);
  state.n_dk = CountMatrix(docs.size(), k_topics, 0);
  state.n_kw = CountMatrix(k_topics, vocab, 0);
  state.n_k.assign(k_topics, 0);
  state.z.resize(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto& ids = docs[d].token_ids;
    state.z[d].resize(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const int w = ids[i];
      if (w < 0 || static_cast<std::size_t>(w) >= vocab) {
        throw ValidationError("lda: token id outside the prior's vocabulary");
      }
      const int k = static_cast<int>(UniformIndex(state.rng, k_topics));
      state.z[d][i] = k;
      ++state.n_dk(d, k);
      ++state.n_kw(k, w);
      ++state.n_k[k];
    }
  }
  return state;
}

void GibbsSweep(TopicModelState& state, std::span<const ProcessedDoc> docs,
                const PriorSpec& priors) {
  const std::size_t k_topics = priors.topics();
  std::vector<double> beta_sum = RowSums(priors.beta);
  std::vector<double> cumulative(k_topics);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto& ids = docs[d].token_ids;
    auto& z = state.z[d];
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const int w = ids[i];
      const int old_k = z[i];
      --state.n_dk(d, old_k);
      --state.n_kw(old_k, w);
      --state.n_k[old_k];

      double total = 0.0;
      for (std::size_t k = 0; k < k_topics; ++k) {
        total += (state.n_dk(d, k) + priors.alpha) *
                 (state.n_kw(k, w) + priors.beta(k, w)) /
                 (static_cast<double>(state.n_k[k]) + beta_sum[k]);
        cumulative[k] = total;
      }
      const double u = Uniform01(state.rng) * total;
      std::size_t new_k = 0;
      while (new_k + 1 < k_topics && cumulative[new_k] <= u) ++new_k;

      z[i] = static_cast<int>(new_k);
      ++state.n_dk(d, new_k);
      ++state.n_kw(new_k, w);
      ++state.n_k[new_k];
    }
  }
  ++state.sweeps;
}

void CheckCounts(const TopicModelState& state,
                 std::span<const ProcessedDoc> docs) {
  const std::size_t k_topics = state.n_k.size();
  CountMatrix n_dk(docs.size(), k_topics, 0);
  CountMatrix n_kw(k_topics, state.n_kw.cols(), 0);
  std::vector<long long> n_k(k_topics, 0);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (state.z[d].size() != docs[d].token_ids.size()) {
      throw InvariantError("lda: assignment vector length differs from doc");
    }
    for (std::size_t i = 0; i < state.z[d].size(); ++i) {
      const int k = state.z[d][i];
      ++n_dk(d, k);
      ++n_kw(k, docs[d].token_ids[i]);
      ++n_k[k];
    }
  }
  if (!(n_dk == state.n_dk) || !(n_kw == state.n_kw) || n_k != state.n_k) {
    throw InvariantError("lda: count matrices inconsistent with assignments");
  }
}

TopicWordDist EstimatePhi(const TopicModelState& state,
                          const PriorSpec& priors) {
  const std::size_t k_topics = priors.topics();
  const std::size_t vocab = priors.vocab_size();
  const std::vector<double> beta_sum = RowSums(priors.beta);
  TopicWordDist phi(k_topics, vocab);
  for (std::size_t k = 0; k < k_topics; ++k) {
    const double denom = static_cast<double>(state.n_k[k]) + beta_sum[k];
    for (std::size_t w = 0; w < vocab; ++w) {
      phi(k, w) = (state.n_kw(k, w) + priors.beta(k, w)) / denom;
    }
  }
  return phi;
}

DocTopicDist EstimateTheta(const TopicModelState& state, double alpha) {
  const std::size_t docs = state.n_dk.rows();
  const std::size_t k_topics = state.n_dk.cols();
  DocTopicDist theta(docs, k_topics);
  for (std::size_t d = 0; d < docs; ++d) {
    long long len = 0;
    for (int c : state.n_dk.row(d)) len += c;
    const double denom = static_cast<double>(len) + k_topics * alpha;
    for (std::size_t k = 0; k < k_topics; ++k) {
      theta(d, k) = denom > 0.0 ? (state.n_dk(d, k) + alpha) / denom
                                : 1.0 / static_cast<double>(k_topics);
    }
  }
  return theta;
}

TrainResult Train(std::span<const ProcessedDoc> docs, const PriorSpec& priors,
                  const TrainOptions& options) {
  if (options.burn_in < 0 || options.n_sweeps <= options.burn_in) {
    throw ValidationError("lda: n_sweeps must exceed burn_in >= 0");
  }
  if (options.sample_lag < 1) {
    throw ValidationError("lda: sample_lag must be >= 1");
  }
  TopicModelState state = InitState(docs, priors, options.seed);
  TrainResult result;
  result.phi = RealMatrix(priors.topics(), priors.vocab_size(), 0.0);
  result.theta = RealMatrix(docs.size(), priors.topics(), 0.0);
  for (int sweep = 1; sweep <= options.n_sweeps; ++sweep) {
    GibbsSweep(state, docs, priors);
    if (sweep <= options.burn_in ||
        (sweep - options.burn_in - 1) % options.sample_lag != 0) {
      continue;
    }
    const auto phi = EstimatePhi(state, priors);
    const auto theta = EstimateTheta(state, priors.alpha);
    for (std::size_t i = 0; i < phi.data().size(); ++i) {
      result.phi.data()[i] += phi.data()[i];
    }
    for (std::size_t i = 0; i < theta.data().size(); ++i) {
      result.theta.data()[i] += theta.data()[i];
    }
    ++result.samples;
  }
  const double inv = 1.0 / result.samples;
  for (double& x : result.phi.data()) x *= inv;
  for (double& x : result.theta.data()) x *= inv;
  return result;
}

json MatrixToJson(const RealMatrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  }
  return rows;
}

RealMatrix MatrixFromJson(const json& j) {
  if (!j.is_array()) throw ValidationError("matrix: expected an array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = rows == 0 ? 0 : j[0].size();
  RealMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw ValidationError("matrix: ragged rows");
    }
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

json CheckpointToJson(const ModelCheckpoint& c) {
  json j;
  j["format"] = "topicstream-checkpoint";
  j["version"] = kCheckpointVersion;
  j["K"] = c.topics;
  j["V"] = c.vocab_size;
  j["seed"] = c.seed;
  j["sweeps"] = c.sweeps;
  j["alpha"] = c.priors.alpha;
  j["beta"] = MatrixToJson(c.priors.beta);
  j["phi"] = MatrixToJson(c.phi);
  j["theta"] = MatrixToJson(c.theta);
  return j;
}

ModelCheckpoint CheckpointFromJson(const json& j) {
  try {
    if (j.at("format") != "topicstream-checkpoint") {
      throw ValidationError("checkpoint: unknown container format");
    }
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw ValidationError("checkpoint: unsupported version");
    }
    ModelCheckpoint c;
    c.topics = j.at("K").get<std::size_t>();
    c.vocab_size = j.at("V").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.sweeps = j.at("sweeps").get<int>();
    c.priors.alpha = j.at("alpha").get<double>();
    c.priors.beta = MatrixFromJson(j.at("beta"));
    c.phi = MatrixFromJson(j.at("phi"));
    c.theta = MatrixFromJson(j.at("theta"));
    if (c.phi.rows() != c.topics || c.phi.cols() != c.vocab_size ||
        c.priors.beta.rows() != c.topics ||
        c.priors.beta.cols() != c.vocab_size ||
        (c.theta.rows() > 0 && c.theta.cols() != c.topics)) {
      throw ValidationError("checkpoint: dimensions disagree with K/V");
    }
    return c;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("checkpoint: ") + e.what());
  }
}

void SaveCheckpoint(const std::filesystem::path& path,
                    const ModelCheckpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint '" + path.string() + "'");
  out << CheckpointToJson(checkpoint).dump() << '\n';
}

ModelCheckpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint '" + path.string() + "'");
  try {
    return CheckpointFromJson(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("checkpoint: ") + e.what());
  }
}

}  // namespace topicstream
