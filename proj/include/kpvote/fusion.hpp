#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>

#include "kpvote/errors.hpp"

namespace kpvote {

// Desk-scale forward reference of the bidirectional fusion block: pooled
// single-query cross-attention in both directions, residual broadcast onto
// each modality, concatenation into one sequence, a pre-norm transformer
// layer, and the order-preserving split. A math reference, not a
// performance path: sequences are capped at L <= 1024, C <= 64.

enum class Modality { rgb, geometry, fused };

struct FeatureSequence {
  Eigen::MatrixXd data;  ///< L x C
  Modality modality = Modality::rgb;
  Eigen::Index rgb_length = 0;  ///< H*W tokens (fused: first block)
  Eigen::Index geo_length = 0;  ///< N tokens (fused: second block)

  Eigen::Index length() const { return data.rows(); }
  Eigen::Index channels() const { return data.cols(); }

  static FeatureSequence rgb(Eigen::MatrixXd tokens);
  static FeatureSequence geometry(Eigen::MatrixXd tokens);
  static FeatureSequence fused(Eigen::MatrixXd tokens, Eigen::Index rgb_length,
                               Eigen::Index geo_length);

  void validate() const;
};

/// Projections for one attention module; heads must divide the channel
/// count, per-head width d_k = C / heads.
struct AttentionWeights {
  Eigen::MatrixXd w_q_max;  ///< C x C, applied to the pooled query
  Eigen::MatrixXd w_k;      ///< C x C
  Eigen::MatrixXd w_v;      ///< C x C
  Eigen::MatrixXd w_o;      ///< C x C, output projection
  int heads = 1;

  static AttentionWeights identity(Eigen::Index channels, int heads);
  /// Deterministic pseudo-random init (no learned values exist to import).
  static AttentionWeights random(Eigen::Index channels, int heads,
                                 std::uint64_t seed);
  void validate(Eigen::Index channels) const;
};

/// One pre-norm transformer layer: self-attention (query from the full
/// sequence), two layer norms, and a 2-layer MLP with hidden width 4C and
/// gaussian-error-linear activation. When `positional` is non-empty it is
/// added to the input first (the first layer of a stack owns the
/// embedding).
struct TransformerLayerWeights {
  AttentionWeights self_attention;
  Eigen::VectorXd ln1_scale, ln1_shift;  ///< C
  Eigen::VectorXd ln2_scale, ln2_shift;  ///< C
  Eigen::MatrixXd mlp_w1;                ///< C x 4C
  Eigen::VectorXd mlp_b1;                ///< 4C
  Eigen::MatrixXd mlp_w2;                ///< 4C x C
  Eigen::VectorXd mlp_b2;                ///< C
  Eigen::MatrixXd positional;            ///< L x C, may be empty

  static TransformerLayerWeights identity(Eigen::Index channels, int heads);
  static TransformerLayerWeights random(Eigen::Index length,
                                        Eigen::Index channels, int heads,
                                        std::uint64_t seed);
  void validate(Eigen::Index length, Eigen::Index channels) const;
};

/// Column-wise maximum over the sequence (the global pooled feature).
Eigen::RowVectorXd pooled_query(const FeatureSequence& features);

/// Single-query multi-head cross-attention: Q from the pooled query source,
/// K and V from the kv source, softmax(Q K^T / sqrt(d_k)) V per head,
/// concatenated heads projected by w_o. Returns one global C-vector.
Eigen::RowVectorXd cross_attention(const FeatureSequence& query_source,
                                   const FeatureSequence& kv_source,
                                   const AttentionWeights& weights);

/// Both cross-attention directions, each broadcast-added to its kv-side
/// sequence, concatenated rgb block first. rgb_to_geo carries information
/// from the pooled rgb query into the geometry block and vice versa.
FeatureSequence fuse_bidirectional(const FeatureSequence& rgb,
                                   const FeatureSequence& geo,
                                   const AttentionWeights& rgb_to_geo,
                                   const AttentionWeights& geo_to_rgb);

/// x0 = seq (+ positional); x1 = MSA(LN(x0)) + x0; out = MLP(LN(x1)) + x1.
FeatureSequence transformer_layer(const FeatureSequence& sequence,
                                  const TransformerLayerWeights& weights);

/// Exact inverse of the fuse-time concatenation, using the recorded block
/// lengths. Throws InvalidInput when the metadata is missing/inconsistent.
std::pair<FeatureSequence, FeatureSequence> split_fused(
    const FeatureSequence& sequence);

/// Numerically stable row softmax; every output row sums to 1 (asserted to
/// 1e-6 internally).
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& scores);

/// Row-wise layer normalization (population variance, epsilon 1e-12),
/// then per-channel scale and shift.
Eigen::MatrixXd layer_norm(const Eigen::MatrixXd& x,
                           const Eigen::VectorXd& scale,
                           const Eigen::VectorXd& shift);

}  // namespace kpvote
