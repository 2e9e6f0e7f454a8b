#pragma once
// Transference between the linear form <q.x> and simultaneous
// approximation of (p x_1, ..., p x_n): box covers of the multiplicative
// body, the matrix encodings and their integral pairing, bounded
// enumerations of both systems, and harnesses for the multiplicative,
// union-jack and height transference statements.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "starkit/coefficient.hpp"

namespace starkit {

/// x - k with k the nearest integer, in [-1/2, 1/2).
double nearest_signed_distance(double x);
long double nearest_signed_distance(long double x);

/// (prod max(1, |q_i|))^(1/n).
double f_plus(const std::vector<std::int64_t>& q);

struct NuVector {
  std::vector<double> nu;

  double product() const;
  /// max nu_i |x_i|.
  double h(const std::vector<double>& x) const;
};

/// nu with prod nu = 1 and H_nu(x) <= lambda, or nullopt iff
/// (prod |x_i|)^(1/n) > lambda.
std::optional<NuVector> find_nu(const std::vector<double>& x, double lambda);

struct TransferParams {
  double lambda{0};
  double mu{0};
};

enum class MatrixKind { A, Astar, Atilde, AtildePrime, AtildeTilde, AtildeTildePrime };
const char* matrix_kind_name(MatrixKind k);

struct MatrixEncoding {
  MatrixKind kind{MatrixKind::A};
  Eigen::MatrixXd entries;
};

/// Rows act on integer row vectors (q_1, ..., q_n, p) from the left. The
/// union-jack kinds need n = 2; the primed ones take nu'.
MatrixEncoding build_matrices(MatrixKind kind, const std::vector<double>& x, const TransferParams& params,
                              const NuVector& nu);

/// (a M) . (b M*) for the pair (A, A*) or (A~', A~~').
double phi_value(const MatrixEncoding& m, const MatrixEncoding& mstar, const std::vector<std::int64_t>& a,
                 const std::vector<std::int64_t>& b);
/// The integer the pairing should equal, in integer arithmetic:
/// a_1 b_2 + ... + a_n b_{n+1} + a_{n+1} b_1 for (A, A*),
/// a_3 b_1 + a_2 b_2 - a_1 b_3 for (A~', A~~').
std::int64_t phi_expected(MatrixKind kind, const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b);

/// |q~ M|_inf for q~ = (q, p).
double encoded_norm(const MatrixEncoding& m, const std::vector<std::int64_t>& q_tilde);

// ---------------------------------------------------------------------------

using RealVector = std::vector<Coefficient>;

std::vector<double> to_doubles(const RealVector& x);
bool all_irrational(const RealVector& x);

/// <q.x>, re-evaluated in 50-digit (or exact rational) arithmetic when the
/// long double value is near a threshold or a half-integer.
long double inner_distance(const RealVector& x, const std::vector<std::int64_t>& q);
/// <p x_i>.
long double scaled_distance(const Coefficient& xi, std::int64_t p);

/// q != 0, |q_i| <= qbound, F+(q) <= mu, |<q.x>| <= lambda; sorted by F+
/// then lexicographically.
std::vector<std::vector<std::int64_t>> solve_system_i(const RealVector& x, const TransferParams& params,
                                                      std::int64_t qbound);

struct SystemIISolution {
  std::int64_t p{0};
  double gm{0};            // (prod |<p x_i>|)^(1/n)
  double p_bound{0};       // n mu lambda^((1-n)/n)
  bool within_det_bound{false};  // |p| <= n mu lambda^(1/n)
};

/// First p in 1, -1, 2, -2, ... with |p| <= n mu lambda^((1-n)/n) and
/// gm <= n lambda (or gm <= target when given).
std::optional<SystemIISolution> solve_system_ii(const RealVector& x, const TransferParams& params,
                                                std::optional<double> gm_target = std::nullopt);

struct Prop5Report {
  TransferParams params;
  std::size_t system_i_count{0};
  std::optional<std::vector<std::int64_t>> q_witness;
  std::optional<SystemIISolution> p_witness;
  /// Same search with the target n lambda^(1/n) that the determinant
  /// argument yields.
  std::optional<SystemIISolution> p_witness_det;
  bool forward_counterexample{false};   // (i) solvable, (ii) not
  bool reverse_counterexample{false};   // (ii) solvable, (i) not within qbound
  bool vacuous{false};
};

Prop5Report verify_prop5(const RealVector& x, const TransferParams& params, std::int64_t qbound);

// ---------------------------------------------------------------------------

/// epsilon * 2^-k, k = 1..20.
std::vector<double> epsilon_prime_grid(double epsilon);

struct TransferWitness {
  std::vector<std::int64_t> q;
  double mu{0};
  double lambda{0};
  double lhs{0};            // |<q.x>| (or the union-jack / height analogue)
  std::optional<std::int64_t> p;
  double p_value{0};        // left side of condition (ii) at p
  double eps_prime{0};      // largest admissible grid value, 0 if none
  bool monotone{true};      // admissible set on the grid is downward closed
  bool encoded{false};      // the matrix encoding of q has norm <= 1
  std::string branch;       // "axis" / "rotated" for the union jack
};

struct TransferReport {
  std::string kind;
  std::vector<double> x;
  double epsilon{0};
  double bound{0};
  std::vector<TransferWitness> witnesses;
  std::size_t with_p{0};
  std::size_t with_eps_prime{0};
  std::size_t distinct_p{0};
  /// Index (0-based) after which every witness has p and eps' > 0; equals
  /// witnesses.size() when the tail is empty.
  std::size_t settled_from{0};
};

/// Theorem pipeline for (prod |x_i|)^(1/n): solutions q of
/// |<q.x>| <= (prod max(|q_i|,1))^(-1-eps) with F+(q) <= bound.
TransferReport verify_theorem_multitrans(const RealVector& x, double epsilon, double bound);

/// Union-jack pipeline in the plane, x = (x, y); q ranges over
/// min{axis, rotated}^(1/2) <= bound.
TransferReport verify_theorem_unionjack(const RealVector& xy, double epsilon, double bound);

/// Height / inner-product pipeline: |<q.x>| <= |q|^(-n-eps), |q| <= bound.
TransferReport verify_khintchine_transfer(const RealVector& x, double epsilon, double bound);

/// min{|ab|, |a^2 - b^2| / 2}^(1/2).
double union_jack_value(double a, double b);

}  // namespace starkit
