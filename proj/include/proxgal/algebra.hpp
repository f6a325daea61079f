#pragma once
// Sparse assembly of the bilinear/linear forms and the direct solver used for
// the Newton linear systems.

#include <functional>
#include <iosfwd>
#include <string>

#include <Eigen/Sparse>

#include "proxgal/core.hpp"
#include "proxgal/spaces.hpp"

namespace proxgal {

class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(int rows, int cols) : rows_(rows), cols_(cols) {}

  void add(int i, int j, double v) { triplets_.emplace_back(i, j, v); }
  void finalize();  // compress; duplicate entries are summed

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool finalized() const { return finalized_; }
  const Eigen::SparseMatrix<double>& eigen() const;
  Eigen::SparseMatrix<double>& eigen();

  Vec apply(const Vec& x) const;
  double max_abs() const;
  // max |A - A^T| over stored entries
  double symmetry_defect() const;

  bool symmetric = false;

  // coordinate text format "i j value", one entry per line
  void dump_coordinate(std::ostream& out) const;

 private:
  int rows_ = 0, cols_ = 0;
  bool finalized_ = false;
  std::vector<Eigen::Triplet<double>> triplets_;
  Eigen::SparseMatrix<double> mat_;
};

// Coefficient sampled inside a known cell (fast path for state-dependent
// weights); the int is the volume cell index, or the owning cell for boundary
// quadrature points.
using CellCoefficient = std::function<double(int cell, const Pt& x)>;

struct FormSpec {
  enum class Kind {
    Stiffness,             // (grad u, grad v)
    Mass,                  // (u, v)
    WeightedMass,          // (c u, v), volume or boundary pair
    Elasticity,            // (2 mu eps(u):eps(v) + lambda div u div v)
    BoundaryNormalPairing, // ((u . n), w) over a tagged boundary
    BoundaryMass           // (u, v) over a tagged boundary
  };
  Kind kind;
  const FunctionSpace* trial = nullptr;
  const FunctionSpace* test = nullptr;
  CellCoefficient weight;  // WeightedMass
  double lame_lambda = 1.0, lame_mu = 1.0;
  std::string boundary_tag;
};

FormSpec stiffness_form(const FunctionSpace& space);
FormSpec mass_form(const FunctionSpace& trial, const FunctionSpace& test);
FormSpec weighted_mass_form(const FunctionSpace& trial, const FunctionSpace& test,
                            CellCoefficient weight);
FormSpec elasticity_form(const FunctionSpace& space, double lame_lambda, double lame_mu);
FormSpec boundary_normal_pairing_form(const FunctionSpace& vector_space,
                                      const FunctionSpace& boundary_space,
                                      const std::string& tag);
FormSpec boundary_mass_form(const FunctionSpace& boundary_space);

// rows indexed by the test space, columns by the trial space (full dof sets;
// Dirichlet reduction happens at solve time)
SparseMatrix assemble(const FormSpec& form, const QuadratureRule& quad);

Vec assemble_vector(const std::function<double(const Pt&)>& load, const FunctionSpace& test,
                    const QuadratureRule& quad);
Vec assemble_vector(const std::function<Eigen::Vector2d(const Pt&)>& load,
                    const FunctionSpace& test, const QuadratureRule& quad);
// boundary load against a BoundaryP1Zero test space
Vec assemble_boundary_vector(const CellCoefficient& load, const FunctionSpace& test,
                             const QuadratureRule& quad1d);

struct SolveError : Error {
  explicit SolveError(const std::string& what) : Error(what) {}
};

// Sparse LU with pivoting; verifies the relative residual internally and
// throws SolveError (carrying the reported pivot/column) on failure.
Vec solve_direct(const SparseMatrix& A, const Vec& rhs);
Vec solve_direct(const Eigen::SparseMatrix<double>& A, const Vec& rhs);

// Extracts the free-dof square submatrix of A and folds prescribed values
// into the right-hand side: returns (A_ff, rhs_f with rhs -= A_fc x_c).
void reduce_system(const SparseMatrix& A, const FunctionSpace& space, const Vec& rhs_full,
                   Eigen::SparseMatrix<double>& A_ff, Vec& rhs_f);

// Scatter a free-dof vector back to the full dof vector, filling prescribed values.
Vec expand_free(const FunctionSpace& space, const Vec& x_free);

}  // namespace proxgal
