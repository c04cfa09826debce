#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace polya {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Edge {
  std::size_t i = 0;
  std::size_t j = 0;
  double weight = 1.0;
};

/// Weighted undirected social network. Immutable once built: symmetric
/// weights a_ij, weighted degrees d_i and the row-normalized matrix W = D^-1 A.
class Network {
 public:
  std::size_t size() const noexcept { return static_cast<std::size_t>(degrees_.size()); }
  const Matrix& weights() const noexcept { return weights_; }
  const Vector& degrees() const noexcept { return degrees_; }
  const Matrix& normalized() const noexcept { return normalized_; }
  double max_degree() const noexcept { return degrees_.maxCoeff(); }

 private:
  friend Network build_network(std::size_t n, std::span<const Edge> edges);
  Network(Matrix weights, Vector degrees, Matrix normalized)
      : weights_(std::move(weights)), degrees_(std::move(degrees)), normalized_(std::move(normalized)) {}

  Matrix weights_;
  Vector degrees_;
  Matrix normalized_;
};

// Builds a network on vertices 0..n-1. Each undirected edge is stored both
// ways; a self-loop once. Repeating a pair with the same weight is harmless,
// with a different weight it is DuplicateEdge.
Network build_network(std::size_t n, std::span<const Edge> edges);
// Vertex count inferred as max index + 1.
Network build_network(std::span<const Edge> edges);

/// diag(gamma) * W, or diag(gamma)^-1 * W when `inverse` is set.
Matrix scaled_matrix(const Network& net, std::span<const double> gamma, bool inverse);

struct SpectralResult {
  double radius = 0.0;
  Vector left_vector;  // positive, sums to 1
  int iterations = 0;
  double residual = 0.0;  // ||v^T M - radius v^T||_inf
};

struct PerronOptions {
  double tol = 1e-12;
  int max_iter = 100000;
};

/// Perron root and left Perron vector of a nonnegative irreducible matrix by
/// power iteration on M^T from the uniform vector. Periodic matrices (e.g. a
/// 2-cycle, spectrum ±λ) make plain iteration oscillate; those are detected
/// and retried on M + I, which has the same eigenvectors.
SpectralResult perron(const Matrix& m, PerronOptions options = {});

// Edge-list text: one `i j weight` per line, `#` starts a comment.
std::vector<Edge> parse_edge_list(std::istream& in);

/// Generator shorthands: complete:n, cycle:n, star:n (vertex 0 is the hub,
/// n vertices total), gnp:n:p:seed (Erdős–Rényi, rejected if disconnected).
Network generate_network(const std::string& spec);

}  // namespace polya
