#pragma once

#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pfmbem/bem_dense.hpp"
#include "pfmbem/geometry.hpp"
#include "pfmbem/kernels.hpp"

namespace pfmbem {

enum class TreeKind { square_quadtree, triangle_quadtree };
enum class OperatorKind { S, D, K, T };

/// Cell of the template tree shared by every lattice cell; coordinates are
/// relative to the tree origin (the lattice-cell center).
struct TreeCell {
  Vec2 centroid{0.0, 0.0};
  int level = 0;
  int parent = -1;
  std::vector<int> children;
  std::vector<Vec2> vertices;
};

struct BasicTree {
  std::pair<int, int> lattice_cell_index;
  int scatterer = 0;
  Vec2 origin{0.0, 0.0};
  /// Element ids of the scatterer inside each template cell (every level).
  std::vector<std::vector<int>> element_ids;
};

/// Target cell receives from source cell shifted by m h.
struct Interaction {
  int target_tree;
  int target_cell;
  int source_tree;
  int source_cell;
  int m;
};

struct Forest {
  TreeKind kind = TreeKind::square_quadtree;
  int depth = 0;
  int leaf_capacity = 0;
  double a = 0.0;
  double H = 0.0;
  std::vector<TreeCell> cells;
  std::vector<std::vector<int>> levels;
  std::vector<BasicTree> trees;
  std::vector<Interaction> near;
  std::vector<Interaction> far;

  /// Shared-vertex test between the roots of trees t and s, the latter shifted by m h.
  bool adjacent(int t, int s, int m) const;
  bool touching(int t, int ct, int s, int cs, int m) const;
};

Forest build_forest(const FundamentalBlock& block, TreeKind kind, int leaf_capacity = 32);

/// Moments of one cell: S and K use the psi density with J^-_n, D and T the phi
/// density with dJ^-_n/dnu(y).
Eigen::VectorXcd compute_moments(const Forest& forest, const FundamentalBlock& block, int tree, int cell,
                                 const Eigen::VectorXcd& psi, const WaveContext& ctx, OperatorKind kind, int p);

/// M2L with the full quasi-periodic lattice sum over every image m; d = O_D - O_C.
Eigen::VectorXcd m2l_periodic(const Eigen::VectorXcd& moments, const Vec2& d, const WaveContext& ctx, double H,
                              const LatticeSumConfig& cfg, int p);

/// Per-frequency operator: translations, near-field blocks, interior blocks and the tail channel.
struct FmmOperator {
  struct Leaf {
    int tree;
    int cell;
    std::vector<int> ids;
    Eigen::MatrixXcd p2m;  // (2p+1) x 2n
    Eigen::MatrixXcd l2p;  // 2n x (2p+1)
  };
  struct NearBlock {
    int target_leaf;
    int source_leaf;
    Eigen::MatrixXcd block;  // 2nt x 2ns, image weight included
  };
  struct FarLink {
    int target_cell;
    int source_tree;
    int source_cell;
    cdouble weight;
    int m2l;
  };

  bool built = false;
  int p = 0;
  int N = 0;
  int M = 0;
  cdouble row_scale{1.0};
  const Forest* forest = nullptr;
  std::vector<Leaf> leaves;
  std::vector<std::vector<int>> leaves_of_tree;
  std::vector<std::vector<NearBlock>> near_of_tree;
  std::vector<std::vector<FarLink>> far_of_tree;
  std::vector<Eigen::MatrixXcd> m2m;  // per template cell, to its parent
  std::vector<Eigen::MatrixXcd> l2l;  // per template cell, from its parent
  std::vector<Eigen::MatrixXcd> m2l;  // unique translations keyed by quantized vector
  std::map<TranslationKey, int> m2l_index;
  std::vector<Eigen::MatrixXcd> diagonal;  // identity plus interior, per scatterer
  TailChannel tail;
};

/// epsilon is the lattice-sum tolerance of the tail channel.
FmmOperator prepare_fmm(const Forest& forest, const FundamentalBlock& block, const WaveContext& ctx, int p,
                        double epsilon = 1e-12);

/// (I - A) psi through the fast path; same layout and result as matvec_dense.
Eigen::VectorXcd fmm_matvec(const FmmOperator& op, const Eigen::VectorXcd& psi);

struct ErrorModel {
  double gamma;
  double lambda;
  double tau;
};

ErrorModel error_model_lookup(TreeKind kind, int layer_offset);

}  // namespace pfmbem
