#include "kpvote/fusion.hpp"

#include <cmath>
#include <random>

namespace kpvote {

namespace {

constexpr Eigen::Index kMaxLength = 1024;
constexpr Eigen::Index kMaxChannels = 64;

void check_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw InvalidInput(std::string(what) + ": non-finite entries");
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols,
                              std::mt19937_64& gen, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = normal(gen);
  return m;
}

// Multi-head attention core shared by the single-query cross path and the
// full-sequence self path: rows of `queries` attend over `kv`.
Eigen::MatrixXd attend(const Eigen::MatrixXd& queries,
                       const Eigen::MatrixXd& kv,
                       const AttentionWeights& w) {
  const Eigen::Index c = kv.cols();
  const Eigen::Index dk = c / w.heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));

  const Eigen::MatrixXd q = queries * w.w_q_max;
  const Eigen::MatrixXd k = kv * w.w_k;
  const Eigen::MatrixXd v = kv * w.w_v;

  Eigen::MatrixXd heads(queries.rows(), c);
  for (int h = 0; h < w.heads; ++h) {
    const auto qh = q.middleCols(h * dk, dk);
    const auto kh = k.middleCols(h * dk, dk);
    const auto vh = v.middleCols(h * dk, dk);
    const Eigen::MatrixXd attn = softmax_rows(qh * kh.transpose() * scale);
    heads.middleCols(h * dk, dk) = attn * vh;
  }
  return heads * w.w_o;
}

}  // namespace

FeatureSequence FeatureSequence::rgb(Eigen::MatrixXd tokens) {
  FeatureSequence s;
  s.rgb_length = tokens.rows();
  s.data = std::move(tokens);
  s.modality = Modality::rgb;
  s.validate();
  return s;
}

FeatureSequence FeatureSequence::geometry(Eigen::MatrixXd tokens) {
  FeatureSequence s;
  s.geo_length = tokens.rows();
  s.data = std::move(tokens);
  s.modality = Modality::geometry;
  s.validate();
  return s;
}

FeatureSequence FeatureSequence::fused(Eigen::MatrixXd tokens,
                                       Eigen::Index rgb_length,
                                       Eigen::Index geo_length) {
  FeatureSequence s;
  s.data = std::move(tokens);
  s.modality = Modality::fused;
  s.rgb_length = rgb_length;
  s.geo_length = geo_length;
  s.validate();
  return s;
}

void FeatureSequence::validate() const {
  if (length() < 1 || channels() < 1)
    throw ShapeError("FeatureSequence: empty sequence");
  if (length() > kMaxLength || channels() > kMaxChannels)
    throw ShapeError("FeatureSequence: beyond desk-scale limits (L <= 1024, C <= 64)");
  check_finite(data, "FeatureSequence");
  switch (modality) {
    case Modality::rgb:
      if (rgb_length != length() || geo_length != 0)
        throw ShapeError("FeatureSequence: rgb length bookkeeping broken");
      break;
    case Modality::geometry:
      if (geo_length != length() || rgb_length != 0)
        throw ShapeError("FeatureSequence: geometry length bookkeeping broken");
      break;
    case Modality::fused:
      if (rgb_length < 1 || geo_length < 1 ||
          rgb_length + geo_length != length())
        throw ShapeError("FeatureSequence: fused L must equal H*W + N");
      break;
  }
}

AttentionWeights AttentionWeights::identity(Eigen::Index channels, int heads) {
  AttentionWeights w;
  w.w_q_max = Eigen::MatrixXd::Identity(channels, channels);
  w.w_k = w.w_q_max;
  w.w_v = w.w_q_max;
  w.w_o = w.w_q_max;
  w.heads = heads;
  w.validate(channels);
  return w;
}

AttentionWeights AttentionWeights::random(Eigen::Index channels, int heads,
                                          std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(channels));
  AttentionWeights w;
  w.w_q_max = random_matrix(channels, channels, gen, scale);
  w.w_k = random_matrix(channels, channels, gen, scale);
  w.w_v = random_matrix(channels, channels, gen, scale);
  w.w_o = random_matrix(channels, channels, gen, scale);
  w.heads = heads;
  w.validate(channels);
  return w;
}

void AttentionWeights::validate(Eigen::Index channels) const {
  if (heads < 1 || channels % heads != 0)
    throw ShapeError("AttentionWeights: head count must divide channels");
  for (const Eigen::MatrixXd* m : {&w_q_max, &w_k, &w_v, &w_o}) {
    if (m->rows() != channels || m->cols() != channels)
      throw ShapeError("AttentionWeights: projection must be C x C");
    check_finite(*m, "AttentionWeights");
  }
}

TransformerLayerWeights TransformerLayerWeights::identity(Eigen::Index channels,
                                                          int heads) {
  TransformerLayerWeights w;
  w.self_attention = AttentionWeights::identity(channels, heads);
  w.self_attention.w_o.setZero();  // zero-update attention branch
  w.ln1_scale = Eigen::VectorXd::Ones(channels);
  w.ln1_shift = Eigen::VectorXd::Zero(channels);
  w.ln2_scale = Eigen::VectorXd::Ones(channels);
  w.ln2_shift = Eigen::VectorXd::Zero(channels);
  w.mlp_w1 = Eigen::MatrixXd::Zero(channels, 4 * channels);
  w.mlp_b1 = Eigen::VectorXd::Zero(4 * channels);
  w.mlp_w2 = Eigen::MatrixXd::Zero(4 * channels, channels);
  w.mlp_b2 = Eigen::VectorXd::Zero(channels);
  return w;
}

TransformerLayerWeights TransformerLayerWeights::random(Eigen::Index length,
                                                        Eigen::Index channels,
                                                        int heads,
                                                        std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(channels));
  TransformerLayerWeights w;
  w.self_attention.w_q_max = random_matrix(channels, channels, gen, scale);
  w.self_attention.w_k = random_matrix(channels, channels, gen, scale);
  w.self_attention.w_v = random_matrix(channels, channels, gen, scale);
  w.self_attention.w_o = random_matrix(channels, channels, gen, scale);
  w.self_attention.heads = heads;
  w.ln1_scale = Eigen::VectorXd::Ones(channels) +
                random_matrix(channels, 1, gen, 0.1).col(0);
  w.ln1_shift = random_matrix(channels, 1, gen, 0.1).col(0);
  w.ln2_scale = Eigen::VectorXd::Ones(channels) +
                random_matrix(channels, 1, gen, 0.1).col(0);
  w.ln2_shift = random_matrix(channels, 1, gen, 0.1).col(0);
  w.mlp_w1 = random_matrix(channels, 4 * channels, gen, scale);
  w.mlp_b1 = random_matrix(4 * channels, 1, gen, 0.1).col(0);
  w.mlp_w2 = random_matrix(4 * channels, channels, gen, 0.5 * scale);
  w.mlp_b2 = random_matrix(channels, 1, gen, 0.1).col(0);
  w.positional = random_matrix(length, channels, gen, 0.1);
  return w;
}

void TransformerLayerWeights::validate(Eigen::Index length,
                                       Eigen::Index channels) const {
  self_attention.validate(channels);
  if (ln1_scale.size() != channels || ln1_shift.size() != channels ||
      ln2_scale.size() != channels || ln2_shift.size() != channels)
    throw ShapeError("TransformerLayerWeights: layer-norm params must be C");
  if (mlp_w1.rows() != channels || mlp_w1.cols() != 4 * channels ||
      mlp_b1.size() != 4 * channels || mlp_w2.rows() != 4 * channels ||
      mlp_w2.cols() != channels || mlp_b2.size() != channels)
    throw ShapeError("TransformerLayerWeights: MLP must be C -> 4C -> C");
  if (positional.size() != 0 &&
      (positional.rows() != length || positional.cols() != channels))
    throw ShapeError("TransformerLayerWeights: positional embedding must be L x C");
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& scores) {
  check_finite(scores, "softmax");
  Eigen::MatrixXd out(scores.rows(), scores.cols());
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    const double m = scores.row(r).maxCoeff();
    Eigen::RowVectorXd e = (scores.row(r).array() - m).exp();
    const double sum = e.sum();
    out.row(r) = e / sum;
    if (std::abs(out.row(r).sum() - 1.0) > 1e-6)
      throw InvalidInput("softmax: row does not normalize");
  }
  return out;
}

Eigen::MatrixXd layer_norm(const Eigen::MatrixXd& x,
                           const Eigen::VectorXd& scale,
                           const Eigen::VectorXd& shift) {
  constexpr double kEps = 1e-12;
  Eigen::MatrixXd out(x.rows(), x.cols());
  const double n = static_cast<double>(x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().sum() / n;
    out.row(r) = ((x.row(r).array() - mean) / std::sqrt(var + kEps)).matrix();
    out.row(r) = out.row(r).cwiseProduct(scale.transpose()) + shift.transpose();
  }
  return out;
}

Eigen::RowVectorXd pooled_query(const FeatureSequence& features) {
  features.validate();
  return features.data.colwise().maxCoeff();
}

Eigen::RowVectorXd cross_attention(const FeatureSequence& query_source,
                                   const FeatureSequence& kv_source,
                                   const AttentionWeights& weights) {
  query_source.validate();
  kv_source.validate();
  if (query_source.channels() != kv_source.channels())
    throw ShapeError("cross_attention: channel mismatch");
  weights.validate(kv_source.channels());

  const Eigen::MatrixXd q = pooled_query(query_source);
  return attend(q, kv_source.data, weights).row(0);
}

FeatureSequence fuse_bidirectional(const FeatureSequence& rgb,
                                   const FeatureSequence& geo,
                                   const AttentionWeights& rgb_to_geo,
                                   const AttentionWeights& geo_to_rgb) {
  rgb.validate();
  geo.validate();
  if (rgb.modality != Modality::rgb || geo.modality != Modality::geometry)
    throw InvalidInput("fuse_bidirectional: expects an rgb and a geometry sequence");
  if (rgb.channels() != geo.channels())
    throw ShapeError("fuse_bidirectional: channel mismatch");

  // Each direction: query pooled from the other modality, keys/values and
  // the residual target from this one.
  const Eigen::RowVectorXd into_rgb = cross_attention(geo, rgb, geo_to_rgb);
  const Eigen::RowVectorXd into_geo = cross_attention(rgb, geo, rgb_to_geo);

  Eigen::MatrixXd fused(rgb.length() + geo.length(), rgb.channels());
  fused.topRows(rgb.length()) = rgb.data.rowwise() + into_rgb;
  fused.bottomRows(geo.length()) = geo.data.rowwise() + into_geo;
  return FeatureSequence::fused(std::move(fused), rgb.length(), geo.length());
}

FeatureSequence transformer_layer(const FeatureSequence& sequence,
                                  const TransformerLayerWeights& weights) {
  sequence.validate();
  weights.validate(sequence.length(), sequence.channels());

  Eigen::MatrixXd x0 = sequence.data;
  if (weights.positional.size() != 0) x0 += weights.positional;

  const Eigen::MatrixXd normed1 =
      layer_norm(x0, weights.ln1_scale, weights.ln1_shift);
  const Eigen::MatrixXd x1 = attend(normed1, normed1, weights.self_attention) + x0;

  const Eigen::MatrixXd normed2 =
      layer_norm(x1, weights.ln2_scale, weights.ln2_shift);
  Eigen::MatrixXd hidden =
      (normed2 * weights.mlp_w1).rowwise() + weights.mlp_b1.transpose();
  // gaussian-error-linear activation
  hidden = hidden.unaryExpr([](double v) {
    return 0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0)));
  });
  const Eigen::MatrixXd out =
      ((hidden * weights.mlp_w2).rowwise() + weights.mlp_b2.transpose()) + x1;

  FeatureSequence result = sequence;
  result.data = out;
  result.validate();
  return result;
}

std::pair<FeatureSequence, FeatureSequence> split_fused(
    const FeatureSequence& sequence) {
  if (sequence.modality != Modality::fused)
    throw InvalidInput("split_fused: sequence is not fused");
  if (sequence.rgb_length < 1 || sequence.geo_length < 1 ||
      sequence.rgb_length + sequence.geo_length != sequence.length())
    throw InvalidInput("split_fused: missing or inconsistent block metadata");

  return {FeatureSequence::rgb(sequence.data.topRows(sequence.rgb_length)),
          FeatureSequence::geometry(
              sequence.data.bottomRows(sequence.geo_length))};
}

}  // namespace kpvote
