#pragma once

#include "owco/scenario.hpp"

#include <map>
#include <string>
#include <vector>

namespace owco {

using GalleryParams = std::map<std::string, std::string>;

const std::vector<std::string>& gallery_names();

/// Named constructions. Unknown names or parameters raise InputError.
///
///   kary            k-ary tree with a root loop, lambda_x(w) = w        k, depth
///   shift           unilateral shift with lambda_0 = 0                  weights=sqrt_n|periodic, n, m
///   branching_loop  k branches of length depth glued to a looped root   k, beta, depth, m
///   wco_identity    phi = id, w = 1, Q = delta_1                        n
///   wco_shift       scalar shift with w(n) = sqrt n                     n, m
Scenario make_gallery(const std::string& name, const GalleryParams& params = {});

/// "k=3" style pairs.
GalleryParams parse_params(const std::vector<std::string>& pairs);

/// Atom values used by the k-ary construction: |w|^2 = 0.5, 1, 2.
std::vector<Atom> kary_default_atoms();

Scenario kary_scenario(std::size_t k, std::size_t depth, const std::vector<Atom>& atoms);

/// theta_0 from the m-point Gauss rule of the moments n!, then
/// theta_l = t theta_{l-1} / l. Exact (up to rounding) while l <= 2m - 1.
ThetaFamily shift_recursion_theta(std::size_t n_max, std::size_t m, std::vector<std::string>* notes = nullptr);

} // namespace owco
