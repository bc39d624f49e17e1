#pragma once

#include "proxrl/deep/qnetwork.hpp"

#include <cstddef>

namespace proxrl::deep {

/// Largest singular value of w by power iteration on w^T w from a fixed start.
double spectral_norm(const Eigen::Ref<const Matrix>& w, std::size_t iterations = 100);

/// Bound L on ||grad_params Q(s, a; params)||_2 over one-hot inputs and all
/// actions, so that |Q(s,a;p) - Q(s,a;p')| <= L ||p - p'|| near `net`.
///
/// With H_0 = 1, H_l = ||W_l|| H_{l-1} + ||b_l|| (hidden activation norms) and
/// G_L = 1, G_l = ||W_{l+1}|| G_{l+1} (back-propagated sensitivity), the
/// gradient satisfies ||grad||^2 <= sum_l G_l^2 (H_{l-1}^2 + 1).
double lipschitz_upper_bound(const QNetwork& net);

/// Same bound with every layer norm replaced by its maximum over the two
/// endpoints. Norms are convex, so this holds along the whole segment [a, b].
double lipschitz_upper_bound(const QNetwork& a, const QNetwork& b);

}  // namespace proxrl::deep
