#pragma once

#include "graflow/forcing.hpp"
#include "graflow/grid.hpp"

namespace graflow {

enum class FieldSelector { kF, kGradF, kHessF, kDtF, kForcingAlongGraph };
enum class NormMeasure { kLebesgue, kWeight };

/// Mixed L^{p,q} request: inner spatial L^p over the masked region, outer
/// temporal L^q over the window, p or q = infinity as max norms. The weight
/// measure multiplies the spatial integrand by sqrt(g) (used for the forcing
/// norm, which integrates against d|V_t|).
struct NormRequest {
  double p = 2.0;
  double q = 2.0;
  RegionMask mask = RegionMask::full();
  TimeWindow window;
  FieldSelector field = FieldSelector::kF;
  NormMeasure measure = NormMeasure::kLebesgue;
};

double lpq_norm(const GraphFlow& flow, const ForcingSpec* forcing, const NormRequest& req);

/// Parabolic Hoelder seminorm over grid samples (a lower bound for the true
/// seminorm): order 0 is [f]_alpha with the parabolic distance
/// max(|x-y|^alpha, |t-s|^{alpha/2}); order 1 adds the |t-s|^{(1+alpha)/2}
/// time term to [grad f]_alpha; order 2 is [d_t f]_alpha + [hess f]_alpha.
/// All pairs are scanned when the sample count is small; otherwise a
/// deterministic stratified subsample of `pair_cap` pairs per stratum
/// (spatial / temporal / mixed) is used.
double parabolic_holder(const GraphFlow& flow, double alpha, int order, const RegionMask& mask,
                        const TimeWindow& window, std::size_t pair_cap = 40000);

/// Empirical constant report for the interior estimate
///   |d_t f|_{p,q}(inner) + |hess f|_{p,q}(inner)
///     <= C (R^-2 |f|_{p,q}(outer) + |u|_{p,q}),
/// inner = ball(R/2) x [t_end - (R/2)^2, t_end], outer = ball(R) x
/// [t_end - R^2, t_end]. The ratio is reported, never asserted against a
/// fixed constant.
struct EstimateReport {
  double p = 2.0, q = 2.0, radius = 1.0;
  double alpha = -1.0;  // >= 0 marks the Hoelder variant
  double lhs = 0.0;
  double rhs_f = 0.0;  // R^-2 |f| part
  double rhs_u = 0.0;  // forcing part
  double ratio = 0.0;
  bool degenerate = false;
};

EstimateReport estimate_report(const GraphFlow& flow, const ForcingSpec& forcing, double p,
                               double q, double radius, const Eigen::VectorXd& center);

/// Hoelder (Schauder-style) variant of the interior estimate:
///   |d_t f|_0 + |hess f|_0 + R^alpha ([d_t f]_alpha + [hess f]_alpha)  (inner)
///     <= C (R^-2 |f|_0 + |u|_0 + R^alpha [u]_alpha)                    (outer),
/// with the forcing seminorm taken over ambient positions along the graph.
EstimateReport holder_estimate_report(const GraphFlow& flow, const ForcingSpec& forcing,
                                      double alpha, double radius, const Eigen::VectorXd& center);

}  // namespace graflow
