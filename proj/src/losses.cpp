#include "kpvote/losses.hpp"

#include <cmath>

namespace kpvote {

void LossConfig::validate() const {
  if (!std::isfinite(lambda_seg) || !std::isfinite(lambda_vecf) ||
      !std::isfinite(w_balance) || !std::isfinite(focal_gamma) ||
      !std::isfinite(focal_alpha))
    throw DomainError("LossConfig: non-finite parameter");
  if (!(w_balance > 0.0)) throw DomainError("LossConfig: w_balance must be > 0");
  if (focal_gamma < 0.0) throw DomainError("LossConfig: focal_gamma must be >= 0");
  if (!(focal_alpha > 0.0) || focal_alpha > 1.0)
    throw DomainError("LossConfig: focal_alpha must be in (0, 1]");
}

FocalResult focal_loss(double predicted_prob, bool is_positive,
                       const LossConfig& config) {
  config.validate();
  if (!(predicted_prob > 0.0) || !(predicted_prob < 1.0))
    throw DomainError("focal_loss: probability must be strictly inside (0, 1)");

  const double pt = is_positive ? predicted_prob : 1.0 - predicted_prob;
  const double alpha = config.focal_alpha;
  const double gamma = config.focal_gamma;
  const double one_minus = 1.0 - pt;

  FocalResult out;
  out.loss = -alpha * std::pow(one_minus, gamma) * std::log(pt);

  // d/dp_t, then the chain-rule sign for negatives.
  double d_dpt = -alpha * std::pow(one_minus, gamma) / pt;
  if (gamma > 0.0)
    d_dpt += alpha * gamma * std::pow(one_minus, gamma - 1.0) * std::log(pt);
  out.d_loss_d_prob = is_positive ? d_dpt : -d_dpt;
  return out;
}

L1Result kps_l1_loss(const UnitVector3& predicted, const UnitVector3& target) {
  L1Result out;
  for (int k = 0; k < 3; ++k) {
    const double d = predicted.vec()(k) - target.vec()(k);
    out.loss += std::abs(d);
    out.gradient(k) = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
  }
  return out;
}

VecfResult vecf_loss(std::span<const VecfSample> samples,
                     const LossConfig& config) {
  config.validate();
  if (samples.empty()) throw DomainError("vecf_loss: no samples");

  const double m = static_cast<double>(samples.size());
  VecfResult out;
  out.d_loss_d_confidence.reserve(samples.size());
  for (const VecfSample& s : samples) {
    if (!(s.confidence > 0.0) || s.confidence > 1.0 ||
        !std::isfinite(s.confidence))
      throw DomainError("vecf_loss: confidence must be in (0, 1]");
    const double l = kps_l1_loss(s.predicted_vector, s.target_vector).loss;
    out.loss += l * s.confidence - config.w_balance * std::log(s.confidence);
    out.d_loss_d_confidence.push_back(
        (l - config.w_balance / s.confidence) / m);
  }
  out.loss /= m;
  return out;
}

double total_loss(double seg_loss, double vecf, const LossConfig& config) {
  config.validate();
  if (!std::isfinite(seg_loss) || !std::isfinite(vecf))
    throw DomainError("total_loss: non-finite input");
  return config.lambda_seg * seg_loss + config.lambda_vecf * vecf;
}

}  // namespace kpvote
