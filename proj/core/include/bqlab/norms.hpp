#pragma once

#include <span>
#include <vector>

#include "bqlab/field.hpp"
#include "bqlab/windows.hpp"

namespace bqlab {

/// Exponents of M^s_{p,q}.
struct ModParams {
  double p = 2.0;
  double q = 2.0;
  double s = 0.0;
};

void validate(const ModParams& mp);

/// |box_k f|_p for every box of the bank, in bank order.
std::vector<double> box_norms(const Field& f, double p, const WindowBank& bank);
/// (sum_k (1+|k|)^{sq} norms_k^q)^{1/q}, sup form for q = inf. |k| is Euclidean.
double combine_box_norms(std::span<const double> norms, const WindowBank& bank, double q, double s);

double modulation_norm(const Field& f, const ModParams& mp, const WindowBank& bank);
/// Modulation norm of J^{-1} D v.
double dinvj_modulation_norm(const Field& v, const ModParams& mp, const WindowBank& bank);

}  // namespace bqlab
