// Random eTRS instances (four benchmark classes, a mixed-category suite for
// oracle cross-checks) and the on-disk instance format.
//
// Instance directory:
//   A.mtx      Matrix Market "coordinate real symmetric", lower triangle, %.17g
//   meta.json  {"a": [...], "b": [...], "beta": β, "delta": δ,
//               "class": "...", "seed": s, "annotations": {...}}
#pragma once

#include "etrs/driver.hpp"
#include "etrs/random.hpp"

#include <json.hpp>

#include <Eigen/QR>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

namespace etrs {

// ---------------------------------------------------------------------------
// Sparse symmetric sampler

namespace detail {

struct UnionFind {
  std::vector<Index> parent;
  explicit UnionFind(Index n) : parent(n) { std::iota(parent.begin(), parent.end(), Index{0}); }
  Index find(Index x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

}  // namespace detail

/// Symmetric matrix with zero diagonal whose strict upper triangle is
/// Bernoulli(density) with standard normal values. A random Hamiltonian cycle
/// is added when the sparsity graph is disconnected.
inline SparseMatrix random_sparse_symmetric(Index n, double density, SplitMix64& rng) {
  detail::require(n >= 1, "random_sparse_symmetric: n must be positive");
  detail::require(density > 0.0 && density <= 1.0, fmt::format("random_sparse_symmetric: density {} not in (0, 1]", density));
  std::vector<Eigen::Triplet<double>> trip;
  detail::UnionFind uf(n);
  Index components = n;
  auto add = [&](Index i, Index j, double v) {
    trip.emplace_back(i, j, v);
    trip.emplace_back(j, i, v);
    if (uf.unite(i, j)) --components;
  };
  const double logq = density < 1.0 ? std::log1p(-density) : 0.0;
  for (Index i = 0; i + 1 < n; ++i) {
    Index j = i;
    while (true) {
      if (density >= 1.0) {
        ++j;
      } else {
        // Geometric skip to the next sampled column.
        double u = rng.uniform();
        while (u <= 0.0) u = rng.uniform();
        const double skip = std::floor(std::log(u) / logq);
        if (skip >= static_cast<double>(n)) break;
        j += 1 + static_cast<Index>(skip);
      }
      if (j >= n) break;
      add(i, j, rng.normal());
    }
  }
  if (components > 1) {
    std::vector<Index> p(n);
    std::iota(p.begin(), p.end(), Index{0});
    for (Index i = n - 1; i > 0; --i) std::swap(p[i], p[rng.below(static_cast<std::uint64_t>(i + 1))]);
    for (Index i = 0; i < n && n > 1; ++i) {
      const Index u = p[i], v = p[(i + 1) % n];
      if (n == 2 && i == 1) break;
      add(std::min(u, v), std::max(u, v), rng.normal());
    }
  }
  SparseMatrix A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return A;
}

// ---------------------------------------------------------------------------
// LNGM construction

enum class MuRule { midpoint, uniform };

struct PlantedTRS {
  SparseMatrix A;
  Vector a;
  double delta = 1.0;
  Vector x_lngm;   ///< ‖v₁‖ = √δ scaled eigenvector
  double lambda_lngm = 0.0;
  Vector x_opt;    ///< TRS global minimizer
  double lambda_opt = 0.0;
  double lambda1 = 0.0, lambda2 = 0.0;
};

/// a = −(A + μI)v₁ with ‖v₁‖² = δ makes v₁ the LNGM with multiplier μ, for any
/// μ in (max{0, −λ₂}, −λ₁). The global minimizer is then ≈ −v₁ with multiplier −2λ₁ − μ.
inline PlantedTRS gen_lngm_trs(Index n, double density, std::uint64_t seed, double delta,
                                  MuRule rule = MuRule::midpoint, const SolverConfig& cfg = {}) {
  detail::require(n >= 2, "gen_lngm_trs: need n >= 2");
  detail::require(delta > 0.0, "gen_lngm_trs: delta must be positive");
  for (std::uint64_t attempt = 0; attempt < 50; ++attempt) {
    SplitMix64 rng(SplitMix64::derive(seed, attempt));
    PlantedTRS L;
    L.A = random_sparse_symmetric(n, density, rng);
    const SymOp A = SymOp::sparse(L.A);
    const ExtremeEigs e = extreme_eigs(A, cfg);
    if (!(e.lambda1 < std::min(0.0, e.lambda2)) || e.lambda2 - e.lambda1 <= 1e-6 * std::max(1.0, std::abs(e.lambda1)))
      continue;
    L.lambda1 = e.lambda1;
    L.lambda2 = e.lambda2;
    const double lo = std::max(0.0, -e.lambda2);
    const double hi = -e.lambda1;
    L.delta = delta;
    L.lambda_lngm = rule == MuRule::midpoint ? 0.5 * (lo + hi) : rng.uniform(lo, hi);
    if (!(L.lambda_lngm > lo && L.lambda_lngm < hi)) continue;
    L.x_lngm = std::sqrt(delta) * e.v1;
    L.a = -(A.apply(L.x_lngm) + L.lambda_lngm * L.x_lngm);
    L.lambda_opt = -2.0 * e.lambda1 - L.lambda_lngm;
    CGOptions opt;
    const Vector x0 = -L.x_lngm;
    opt.x0 = &x0;
    const CGResult r = conjugate_gradient([&](const Vector& x) { return Vector(A.apply(x) + L.lambda_opt * x); },
                                          -L.a, 1e-14, std::max<Index>(2000, 20 * n), opt);
    L.x_opt = r.x;
    return L;
  }
  throw Error(fmt::format("gen_lngm_trs: no admissible matrix after 50 draws (n={}, seed={})", n, seed));
}

// ---------------------------------------------------------------------------
// Benchmark classes

enum class InstanceClass { I, II, III, IV };

inline std::string_view to_string(InstanceClass c) {
  switch (c) {
    case InstanceClass::I: return "I";
    case InstanceClass::II: return "II";
    case InstanceClass::III: return "III";
    case InstanceClass::IV: return "IV";
  }
  return "?";
}

inline InstanceClass parse_class(const std::string& s) {
  if (s == "I" || s == "1") return InstanceClass::I;
  if (s == "II" || s == "2") return InstanceClass::II;
  if (s == "III" || s == "3") return InstanceClass::III;
  if (s == "IV" || s == "4") return InstanceClass::IV;
  throw std::invalid_argument(fmt::format("unknown instance class '{}' (expected I, II, III or IV)", s));
}

struct GenSpec {
  InstanceClass cls = InstanceClass::IV;
  Index n = 100;
  double density = 0.1;
  std::uint64_t seed = 1;
  std::optional<double> delta_override;
};

struct GeneratedInstance {
  ETRSInstance inst;
  SparseMatrix A;
  std::string cls;
  std::uint64_t seed = 0;
  nlohmann::json annotations = nlohmann::json::object();
};

inline nlohmann::json to_json_array(const Vector& v) { return nlohmann::json(std::vector<double>(v.begin(), v.end())); }

inline GeneratedInstance generate(const GenSpec& spec, const SolverConfig& cfg = {}) {
  detail::require(spec.n >= 2, "generate: need n >= 2");
  detail::require(spec.density > 0.0 && spec.density <= 1.0, "generate: density must be in (0, 1]");
  GeneratedInstance g;
  g.cls = std::string(to_string(spec.cls));
  g.seed = spec.seed;
  auto finish = [&](SparseMatrix A, Vector a, Vector b, double beta, double delta) {
    g.A = std::move(A);
    g.inst.A = SymOp::sparse(g.A);
    g.inst.a = std::move(a);
    g.inst.b = std::move(b);
    g.inst.beta = beta;
    g.inst.delta = delta;
    return g;
  };

  if (spec.cls == InstanceClass::II) {
    const double delta = spec.delta_override.value_or(4000.0);
    for (std::uint64_t attempt = 0; attempt < 50; ++attempt) {
      SplitMix64 rng(SplitMix64::derive(spec.seed, 1000 + attempt));
      SparseMatrix As = random_sparse_symmetric(spec.n, spec.density, rng);
      const SymOp A = SymOp::sparse(As);
      Vector a = rng.normal_vector(spec.n);
      const ExtremeEigs e = extreme_eigs(A, cfg);
      if (std::abs(e.v1.dot(a)) <= 1e-8 * a.norm()) continue;
      const TRSSolution t = solve_trs(A, a, delta, cfg);
      if (t.kind == TRSCase::interior) continue;
      Vector b = 0.9 * t.x;
      const double beta = b.squaredNorm();
      g.annotations["x_opt"] = to_json_array(t.x);
      g.annotations["lambda_opt"] = t.lambda;
      return finish(std::move(As), std::move(a), std::move(b), beta, delta);
    }
    throw Error(fmt::format("generate: class II recipe failed for seed {}", spec.seed));
  }

  const double delta = spec.delta_override.value_or(1.0);
  PlantedTRS L = gen_lngm_trs(spec.n, spec.density, spec.seed, delta, MuRule::midpoint, cfg);
  g.annotations["x_opt"] = to_json_array(L.x_opt);
  g.annotations["lambda_opt"] = L.lambda_opt;
  g.annotations["x_lngm"] = to_json_array(L.x_lngm);
  g.annotations["lambda_lngm"] = L.lambda_lngm;
  Vector b;
  double beta;
  if (spec.cls == InstanceClass::III) {
    SplitMix64 rng(SplitMix64::derive(spec.seed, 3000));
    const Vector x = rng.uniform_vector(spec.n);
    b = L.A * x - L.lambda1 * x;
    beta = std::max(b.dot(L.x_lngm), b.dot(L.x_opt)) + 0.1 * std::sqrt(delta) * b.norm();
  } else {
    // Classes I and IV: cut off the global minimizer, keep the LNGM.
    b = L.x_opt - L.x_lngm;
    beta = b.dot(0.9 * L.x_lngm + 0.1 * L.x_opt);
  }
  return finish(std::move(L.A), std::move(L.a), std::move(b), beta, delta);
}

// ---------------------------------------------------------------------------
// Mixed categories for oracle cross-checks (dense, n ≤ ~50)

enum class MixedCategory {
  convex_interior,
  convex_boundary,
  indefinite_easy,
  hard_case,
  lngm_present,
  duality_fails,
  duality_holds,
  redundant_linear,
  tangent_feasible
};

inline constexpr std::array<MixedCategory, 9> kMixedCategories = {
    MixedCategory::convex_interior, MixedCategory::convex_boundary, MixedCategory::indefinite_easy,
    MixedCategory::hard_case,       MixedCategory::lngm_present,    MixedCategory::duality_fails,
    MixedCategory::duality_holds,   MixedCategory::redundant_linear, MixedCategory::tangent_feasible};

inline std::string_view to_string(MixedCategory c) {
  switch (c) {
    case MixedCategory::convex_interior: return "convex_interior";
    case MixedCategory::convex_boundary: return "convex_boundary";
    case MixedCategory::indefinite_easy: return "indefinite_easy";
    case MixedCategory::hard_case: return "hard_case";
    case MixedCategory::lngm_present: return "lngm_present";
    case MixedCategory::duality_fails: return "duality_fails";
    case MixedCategory::duality_holds: return "duality_holds";
    case MixedCategory::redundant_linear: return "redundant_linear";
    case MixedCategory::tangent_feasible: return "tangent_feasible";
  }
  return "?";
}

namespace detail {

inline Matrix random_orthogonal(Index n, SplitMix64& rng) {
  Matrix G(n, n);
  for (Index j = 0; j < n; ++j) G.col(j) = rng.normal_vector(n);
  Eigen::HouseholderQR<Matrix> qr(G);
  return qr.householderQ() * Matrix::Identity(n, n);
}

inline Matrix spectral(const Matrix& Q, const Vector& lam) { return Q * lam.asDiagonal() * Q.transpose(); }

/// β drawn strictly inside (−√δ‖b‖, √δ‖b‖).
inline double random_beta(const Vector& b, double delta, SplitMix64& rng) {
  const double edge = std::sqrt(delta) * b.norm();
  return edge * rng.uniform(-0.9, 0.9);
}

}  // namespace detail

/// Instance of the given category with dimension n (n ≥ 2 for the categories
/// that need a second eigenvalue).
inline ETRSInstance generate_mixed(MixedCategory cat, Index n, std::uint64_t seed) {
  detail::require(n >= 1, "generate_mixed: n must be positive");
  SplitMix64 rng(SplitMix64::derive(seed, 77 + static_cast<std::uint64_t>(cat)));
  ETRSInstance inst;
  auto sym = [&](const Matrix& M) { inst.A = SymOp::from_dense(0.5 * (M + M.transpose())); };
  const Matrix Q = detail::random_orthogonal(n, rng);
  Vector b = rng.normal_vector(n);
  switch (cat) {
    case MixedCategory::convex_interior:
    case MixedCategory::convex_boundary: {
      Vector lam(n);
      for (Index i = 0; i < n; ++i) lam[i] = rng.uniform(0.5, 3.0);
      sym(detail::spectral(Q, lam));
      inst.a = rng.normal_vector(n);
      const Vector x0 = -(Q * (Q.transpose() * inst.a).cwiseQuotient(lam));
      inst.delta = cat == MixedCategory::convex_interior ? 2.0 * x0.squaredNorm() + 0.1 : 0.25 * x0.squaredNorm();
      inst.b = b;
      inst.beta = detail::random_beta(b, inst.delta, rng);
      break;
    }
    case MixedCategory::indefinite_easy:
    case MixedCategory::redundant_linear:
    case MixedCategory::tangent_feasible: {
      Vector lam(n);
      for (Index i = 0; i < n; ++i) lam[i] = rng.uniform(-3.0, 3.0);
      sym(detail::spectral(Q, lam));
      inst.a = rng.normal_vector(n);
      inst.delta = rng.uniform(0.5, 4.0);
      inst.b = b;
      const double edge = std::sqrt(inst.delta) * b.norm();
      if (cat == MixedCategory::indefinite_easy) inst.beta = detail::random_beta(b, inst.delta, rng);
      else if (cat == MixedCategory::redundant_linear) inst.beta = edge * rng.uniform(1.0, 2.0);
      else inst.beta = -edge;
      break;
    }
    case MixedCategory::hard_case: {
      Vector lam(n);
      for (Index i = 0; i < n; ++i) lam[i] = rng.uniform(-3.0, 3.0);
      std::sort(lam.data(), lam.data() + n);
      if (n >= 2 && lam[1] - lam[0] < 0.2) lam[0] = lam[1] - 0.2;
      if (lam[0] >= 0.0) lam[0] = -0.5;
      sym(detail::spectral(Q, lam));
      Vector c = rng.normal_vector(n);
      c[0] = 0.0;
      inst.a = Q * c;
      Vector xm = Vector::Zero(n);
      for (Index i = 1; i < n; ++i) xm[i] = -c[i] / (lam[i] - lam[0]);
      inst.delta = xm.squaredNorm() + rng.uniform(0.5, 2.0);
      inst.b = b;
      inst.beta = detail::random_beta(b, inst.delta, rng);
      break;
    }
    case MixedCategory::lngm_present:
    case MixedCategory::duality_fails:
    case MixedCategory::duality_holds: {
      detail::require(n >= 2, "generate_mixed: LNGM categories need n >= 2");
      const double delta = rng.uniform(0.5, 4.0);
      const PlantedTRS L = gen_lngm_trs(n, 1.0, SplitMix64::derive(seed, 5), delta, MuRule::uniform);
      inst.A = SymOp::sparse(L.A);
      inst.a = L.a;
      inst.delta = delta;
      if (cat == MixedCategory::lngm_present) {
        inst.b = b;
        inst.beta = detail::random_beta(b, delta, rng);
      } else if (cat == MixedCategory::duality_fails) {
        inst.b = L.x_opt - L.x_lngm;
        inst.beta = inst.b.dot(0.9 * L.x_lngm + 0.1 * L.x_opt);
      } else {
        const Vector x = rng.uniform_vector(n);
        inst.b = L.A * x - L.lambda1 * x;
        inst.beta = std::max(inst.b.dot(L.x_lngm), inst.b.dot(L.x_opt)) + 0.1 * std::sqrt(delta) * inst.b.norm();
      }
      break;
    }
  }
  return inst;
}

// ---------------------------------------------------------------------------
// File I/O

struct InstanceFile {
  ETRSInstance inst;
  SparseMatrix A;
  std::string cls;
  std::uint64_t seed = 0;
  nlohmann::json annotations = nlohmann::json::object();
};

inline void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& A) {
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  Index nnz = 0;
  for (Index j = 0; j < A.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(A, j); it; ++it)
      if (it.row() >= it.col()) ++nnz;
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << fmt::format("{} {} {}\n", A.rows(), A.cols(), nnz);
  for (Index j = 0; j < A.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(A, j); it; ++it)
      if (it.row() >= it.col()) out << fmt::format("{} {} {:.17g}\n", it.row() + 1, it.col() + 1, it.value());
}

inline SparseMatrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  const std::string file = path.string();
  if (!in) throw ParseError(file, 0, 0, "cannot open file");
  std::string line;
  long lineno = 0;
  if (!std::getline(in, line)) throw ParseError(file, 1, 1, "empty file");
  ++lineno;
  std::istringstream hs(line);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  auto lower = [](std::string s) {
    for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return s;
  };
  if (banner != "%%MatrixMarket") throw ParseError(file, 1, 1, "missing %%MatrixMarket banner");
  if (lower(object) != "matrix" || lower(format) != "coordinate")
    throw ParseError(file, 1, static_cast<long>(banner.size() + 2), "only 'matrix coordinate' is supported");
  field = lower(field);
  symmetry = lower(symmetry);
  if (field != "real" && field != "integer" && field != "double")
    throw ParseError(file, 1, static_cast<long>(line.find(field) + 1), fmt::format("unsupported field '{}'", field));
  if (symmetry != "symmetric" && symmetry != "general")
    throw ParseError(file, 1, static_cast<long>(line.find(symmetry) + 1),
                     fmt::format("unsupported symmetry '{}'", symmetry));
  // Size line after comments.
  long rows = -1, cols = -1, nnz = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ss(line);
    if (!(ss >> rows >> cols >> nnz) || rows <= 0 || cols <= 0 || nnz < 0)
      throw ParseError(file, lineno, 1, "expected 'rows cols nnz'");
    break;
  }
  if (rows < 0) throw ParseError(file, lineno, 1, "missing size line");
  if (rows != cols) throw ParseError(file, lineno, 1, fmt::format("matrix is not square ({}x{})", rows, cols));
  std::vector<Eigen::Triplet<double>> trip;
  long count = 0;
  while (count < nnz && std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ss(line);
    long i, j;
    double v;
    if (!(ss >> i)) throw ParseError(file, lineno, 1, "expected row index");
    if (!(ss >> j)) throw ParseError(file, lineno, static_cast<long>(line.find_first_of(" \t") + 2), "expected column index");
    if (!(ss >> v)) {
      const auto pos = line.find_last_of(" \t");
      throw ParseError(file, lineno, static_cast<long>(pos == std::string::npos ? 1 : pos + 2), "expected value");
    }
    if (i < 1 || i > rows || j < 1 || j > cols)
      throw ParseError(file, lineno, 1, fmt::format("index ({}, {}) out of range", i, j));
    trip.emplace_back(i - 1, j - 1, v);
    if (symmetry == "symmetric" && i != j) trip.emplace_back(j - 1, i - 1, v);
    ++count;
  }
  if (count < nnz) throw ParseError(file, lineno + 1, 1, fmt::format("expected {} entries, found {}", nnz, count));
  SparseMatrix A(rows, cols);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  if (symmetry == "general") {
    const SparseMatrix At = A.transpose();
    if ((A - At).norm() > 1e-14 * std::max(1.0, A.norm()))
      throw ParseError(file, 1, 1, "matrix declared general is not symmetric");
  }
  return A;
}

namespace detail {

inline std::pair<long, long> line_col(const std::string& text, std::size_t byte) {
  long line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline Vector json_vector(const nlohmann::json& j, const std::string& key, const std::string& file) {
  if (!j.contains(key)) throw ParseError(file, 1, 1, fmt::format("missing field '{}'", key));
  const auto& v = j.at(key);
  if (!v.is_array()) throw ParseError(file, 1, 1, fmt::format("field '{}' must be an array of numbers", key));
  Vector out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ParseError(file, 1, 1, fmt::format("field '{}'[{}] is not a number", key, i));
    out[static_cast<Index>(i)] = v[i].get<double>();
  }
  return out;
}

inline double json_number(const nlohmann::json& j, const std::string& key, const std::string& file) {
  if (!j.contains(key)) throw ParseError(file, 1, 1, fmt::format("missing field '{}'", key));
  if (!j.at(key).is_number()) throw ParseError(file, 1, 1, fmt::format("field '{}' must be a number", key));
  return j.at(key).get<double>();
}

}  // namespace detail

inline void write_instance(const std::filesystem::path& dir, const SparseMatrix& A, const ETRSInstance& inst,
                           const std::string& cls = "", std::uint64_t seed = 0,
                           const nlohmann::json& annotations = nlohmann::json::object()) {
  std::filesystem::create_directories(dir);
  write_matrix_market(dir / "A.mtx", A);
  nlohmann::json j;
  j["a"] = to_json_array(inst.a);
  j["b"] = to_json_array(inst.b);
  j["beta"] = inst.beta;
  j["delta"] = inst.delta;
  j["class"] = cls;
  j["seed"] = seed;
  j["annotations"] = annotations;
  std::ofstream out(dir / "meta.json");
  if (!out) throw Error(fmt::format("cannot write {}", (dir / "meta.json").string()));
  out << j.dump(1) << "\n";
}

inline void write_instance(const std::filesystem::path& dir, const GeneratedInstance& g) {
  write_instance(dir, g.A, g.inst, g.cls, g.seed, g.annotations);
}

inline InstanceFile read_instance(const std::filesystem::path& dir) {
  InstanceFile f;
  f.A = read_matrix_market(dir / "A.mtx");
  const std::string file = (dir / "meta.json").string();
  std::ifstream in(dir / "meta.json");
  if (!in) throw ParseError(file, 0, 0, "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [l, c] = detail::line_col(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError(file, l, c, e.what());
  }
  if (!j.is_object()) throw ParseError(file, 1, 1, "top-level value must be an object");
  f.inst.A = SymOp::sparse(f.A);
  f.inst.a = detail::json_vector(j, "a", file);
  f.inst.b = detail::json_vector(j, "b", file);
  f.inst.beta = detail::json_number(j, "beta", file);
  f.inst.delta = detail::json_number(j, "delta", file);
  if (j.contains("class") && j["class"].is_string()) f.cls = j["class"].get<std::string>();
  if (j.contains("seed") && j["seed"].is_number_unsigned()) f.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("annotations")) f.annotations = j["annotations"];
  if (f.inst.a.size() != f.A.rows() || f.inst.b.size() != f.A.rows())
    throw ParseError(file, 1, 1,
                     fmt::format("vector lengths (a: {}, b: {}) do not match matrix dimension {}", f.inst.a.size(),
                                 f.inst.b.size(), f.A.rows()));
  return f;
}

inline nlohmann::json solution_to_json(const ETRSSolution& s) {
  nlohmann::json j;
  j["x"] = to_json_array(s.x);
  j["obj"] = s.obj;
  j["provenance"] = std::string(to_string(s.provenance));
  j["lambda"] = s.lambda_ball;
  j["linear_active"] = s.linear_active;
  j["kkt1"] = s.kkt1;
  j["kkt2"] = s.kkt2;
  j["feasibility"] = std::string(to_string(s.feasibility));
  if (s.duality) {
    j["duality"] = {{"verdict", std::string(to_string(s.duality->verdict))},
                    {"reason", std::string(to_string(s.duality->reason))}};
    if (!std::isnan(s.duality->mu)) j["duality"]["mu"] = s.duality->mu;
  } else {
    j["duality"] = s.duality_inconclusive ? "inconclusive" : "skipped";
  }
  j["lngm"] = s.lngm_searched ? std::string(to_string(s.lngm.status)) : std::string("not_searched");
  j["time_total"] = s.time_total;
  j["time_duality"] = s.time_duality;
  return j;
}

}  // namespace etrs
