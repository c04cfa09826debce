#include "polya/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <map>
#include <sstream>
#include <utility>

#include "polya/error.hpp"
#include "polya/random.hpp"

namespace polya {

namespace {

void require_connected(const Matrix& weights) {
  const auto n = weights.rows();
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::deque<Eigen::Index> queue{0};
  seen[0] = true;
  Eigen::Index visited = 1;
  while (!queue.empty()) {
    const auto u = queue.front();
    queue.pop_front();
    for (Eigen::Index v = 0; v < n; ++v) {
      if (weights(u, v) > 0.0 && !seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = true;
        ++visited;
        queue.push_back(v);
      }
    }
  }
  if (visited != n) {
    throw Error(ErrorCode::DisconnectedGraph,
                "only " + std::to_string(visited) + " of " + std::to_string(n) +
                    " vertices reachable from vertex 0");
  }
}

Vector transpose_apply(const Matrix& m, const Vector& v) { return m.transpose() * v; }

struct PowerOutcome {
  bool converged = false;
  double radius = 0.0;
  Vector vec;
  int iterations = 0;
  double residual = 0.0;
};

double left_residual(const Matrix& m, const Vector& v, double radius) {
  return (transpose_apply(m, v) - radius * v).cwiseAbs().maxCoeff();
}

// Plain power iteration on m^T. Gives up early when the residual stalls,
// which is what a period-2 oscillation looks like.
PowerOutcome power_iterate(const Matrix& m, double tol, int max_iter, bool allow_stall_exit) {
  const auto n = m.rows();
  PowerOutcome out;
  out.vec = Vector::Constant(n, 1.0 / static_cast<double>(n));
  double best_at_checkpoint = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= max_iter; ++it) {
    Vector next = transpose_apply(m, out.vec);
    const double sum = next.sum();
    if (!(sum > 0.0)) {
      throw Error(ErrorCode::DomainError, "perron: matrix maps the positive cone to zero");
    }
    out.radius = sum;  // v sums to 1, so sum(v^T M) is the Rayleigh-type estimate
    next /= sum;
    out.vec = std::move(next);
    out.iterations = it;
    out.residual = left_residual(m, out.vec, out.radius);
    if (out.residual <= tol) {
      out.converged = true;
      return out;
    }
    if (allow_stall_exit && it % 100 == 0) {
      if (it >= 200 && out.residual > 0.5 * best_at_checkpoint) return out;
      best_at_checkpoint = std::min(best_at_checkpoint, out.residual);
    }
  }
  return out;
}

}  // namespace

Network build_network(std::size_t n, std::span<const Edge> edges) {
  if (n < 2) throw Error(ErrorCode::DimensionMismatch, "network needs at least 2 vertices");
  const auto dim = static_cast<Eigen::Index>(n);
  Matrix weights = Matrix::Zero(dim, dim);
  std::map<std::pair<std::size_t, std::size_t>, double> seen;
  for (const auto& e : edges) {
    if (e.i >= n || e.j >= n) {
      throw Error(ErrorCode::InvalidIndex, "edge (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                                               ") outside 0.." + std::to_string(n - 1));
    }
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
      throw Error(ErrorCode::NegativeWeight, "edge (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                                                 ") has weight " + std::to_string(e.weight));
    }
    const auto key = std::minmax(e.i, e.j);
    auto [it, inserted] = seen.emplace(key, e.weight);
    if (!inserted) {
      if (it->second != e.weight) {
        throw Error(ErrorCode::DuplicateEdge, "pair (" + std::to_string(key.first) + "," +
                                                  std::to_string(key.second) + ") listed with conflicting weights");
      }
      continue;
    }
    const auto a = static_cast<Eigen::Index>(e.i);
    const auto b = static_cast<Eigen::Index>(e.j);
    weights(a, b) = e.weight;
    weights(b, a) = e.weight;
  }
  Vector degrees = weights.rowwise().sum();
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (!(degrees(i) > 0.0)) {
      throw Error(ErrorCode::IsolatedVertex, "vertex " + std::to_string(i) + " has zero degree");
    }
  }
  require_connected(weights);
  Matrix normalized = degrees.cwiseInverse().asDiagonal() * weights;
  return Network(std::move(weights), std::move(degrees), std::move(normalized));
}

Network build_network(std::span<const Edge> edges) {
  std::size_t n = 0;
  for (const auto& e : edges) n = std::max({n, e.i + 1, e.j + 1});
  return build_network(n, edges);
}

Matrix scaled_matrix(const Network& net, std::span<const double> gamma, bool inverse) {
  if (gamma.size() != net.size()) {
    throw Error(ErrorCode::DimensionMismatch, "gamma has " + std::to_string(gamma.size()) +
                                                  " entries for " + std::to_string(net.size()) + " agents");
  }
  Vector scale(static_cast<Eigen::Index>(gamma.size()));
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    if (!(gamma[i] > 0.0) || !std::isfinite(gamma[i])) {
      throw Error(ErrorCode::NonPositiveGamma, "gamma[" + std::to_string(i) + "] = " + std::to_string(gamma[i]));
    }
    scale(static_cast<Eigen::Index>(i)) = inverse ? 1.0 / gamma[i] : gamma[i];
  }
  return scale.asDiagonal() * net.normalized();
}

SpectralResult perron(const Matrix& m, PerronOptions options) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "perron: matrix must be square and non-empty");
  }
  if (!(options.tol > 0.0)) throw Error(ErrorCode::DomainError, "perron: tol must be positive");
  if ((m.array() < 0.0).any()) throw Error(ErrorCode::DomainError, "perron: matrix has negative entries");

  PowerOutcome plain = power_iterate(m, options.tol, options.max_iter, /*allow_stall_exit=*/true);
  if (plain.converged) {
    return {plain.radius, std::move(plain.vec), plain.iterations, plain.residual};
  }

  constexpr double shift = 1.0;
  Matrix shifted = m;
  shifted.diagonal().array() += shift;
  PowerOutcome retry = power_iterate(shifted, options.tol, options.max_iter, /*allow_stall_exit=*/false);
  const double radius = retry.radius - shift;
  const double residual = left_residual(m, retry.vec, radius);
  if (residual > options.tol) {
    throw Error(ErrorCode::NoConvergence, "perron: residual " + std::to_string(residual) + " after " +
                                              std::to_string(plain.iterations + retry.iterations) + " iterations");
  }
  return {radius, std::move(retry.vec), plain.iterations + retry.iterations, residual};
}

std::vector<Edge> parse_edge_list(std::istream& in) {
  std::vector<Edge> edges;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    long long i = 0;
    long long j = 0;
    double w = 0.0;
    if (!(fields >> i)) continue;  // blank or comment-only
    if (!(fields >> j >> w) || i < 0 || j < 0) {
      throw Error(ErrorCode::ParseError, "edge list line " + std::to_string(line_no) + ": expected `i j weight`");
    }
    std::string extra;
    if (fields >> extra) {
      throw Error(ErrorCode::ParseError, "edge list line " + std::to_string(line_no) + ": trailing text");
    }
    edges.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), w});
  }
  return edges;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  return parts;
}

template <typename T>
T parse_number(const std::string& text, const std::string& spec) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw Error(ErrorCode::ParseError, "graph spec `" + spec + "`: bad number `" + text + "`");
  }
  return value;
}

}  // namespace

Network generate_network(const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts.size() < 2) throw Error(ErrorCode::ParseError, "graph spec `" + spec + "` has no size");
  const auto& kind = parts[0];
  const auto n = parse_number<std::size_t>(parts[1], spec);
  std::vector<Edge> edges;
  if (kind == "complete" && parts.size() == 2) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) edges.push_back({i, j, 1.0});
  } else if (kind == "cycle" && parts.size() == 2) {
    if (n == 2) {
      edges.push_back({0, 1, 1.0});
    } else {
      for (std::size_t i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, 1.0});
    }
  } else if (kind == "star" && parts.size() == 2) {
    for (std::size_t i = 1; i < n; ++i) edges.push_back({0, i, 1.0});
  } else if (kind == "gnp" && parts.size() == 4) {
    const auto p = parse_number<double>(parts[2], spec);
    const auto seed = parse_number<std::uint64_t>(parts[3], spec);
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::ParseError, "graph spec `" + spec + "`: p outside [0,1]");
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (rng.uniform() < p) edges.push_back({i, j, 1.0});
  } else {
    throw Error(ErrorCode::ParseError, "unknown graph spec `" + spec + "`");
  }
  return build_network(n, edges);
}

}  // namespace polya
