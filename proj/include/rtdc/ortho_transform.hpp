#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "rtdc/matrix.hpp"

namespace rtdc {

/// Orthogonal change of basis built up during deflation:
///   x_original = P · G_1 · G_2 ⋯ G_k · y_working
/// where P scatters working index i to original index perm[i] and every G_t
/// mixes a few working coordinates.
class OrthoTransform {
 public:
  /// Plane rotation on working indices (a, b):
  ///   old_a = c·new_a + s·new_b,  old_b = -s·new_a + c·new_b.
  struct Givens {
    std::size_t a, b;
    double c, s;
  };
  /// Dense orthogonal block: old[idx] = u · new[idx].
  struct Block {
    std::vector<std::size_t> idx;
    Matrix u;
  };

  OrthoTransform() = default;
  explicit OrthoTransform(std::vector<std::size_t> perm) : perm_(std::move(perm)) {}

  std::size_t size() const noexcept { return perm_.size(); }
  const std::vector<std::size_t>& perm() const noexcept { return perm_; }
  std::size_t op_count() const noexcept { return ops_.size(); }
  std::size_t givens_count() const noexcept;

  void push(Givens g) { ops_.emplace_back(g); }
  void push(Block b) { ops_.emplace_back(std::move(b)); }

  /// Maps a working-coordinate vector to original coordinates.
  std::vector<double> apply(std::span<const double> working) const;

  /// Maps the columns of y (rows indexed by working coordinates).
  Matrix apply(const Matrix& y) const;

  /// Original-coordinate image of working unit vector e_i.
  std::vector<double> column(std::size_t i) const;

 private:
  void apply_ops(std::span<double> v) const;

  std::vector<std::size_t> perm_;
  std::vector<std::variant<Givens, Block>> ops_;
};

}  // namespace rtdc
