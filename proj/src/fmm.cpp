#include "pfmbem/fmm.hpp"

#include <cmath>
#include <functional>

#include "pfmbem/element_integrals.hpp"
#include "pfmbem/errors.hpp"
#include "pfmbem/expansions.hpp"
#include "pfmbem/parallel.hpp"

namespace pfmbem {

namespace {

constexpr int kMaxDepth = 10;

Vec2 mean(const std::vector<Vec2>& v) {
  Vec2 c(0.0, 0.0);
  for (const Vec2& x : v) c += x;
  return c / static_cast<double>(v.size());
}

void add_cell(std::vector<TreeCell>& cells, int parent, std::vector<Vec2> vertices) {
  TreeCell c;
  c.parent = parent;
  c.level = parent < 0 ? 0 : cells[parent].level + 1;
  c.centroid = mean(vertices);
  c.vertices = std::move(vertices);
  if (parent >= 0) cells[parent].children.push_back(static_cast<int>(cells.size()));
  cells.push_back(std::move(c));
}

void subdivide(std::vector<TreeCell>& cells, int id, TreeKind kind) {
  const std::vector<Vec2> v = cells[id].vertices;
  if (kind == TreeKind::square_quadtree) {
    const Vec2 c = cells[id].centroid;
    for (int q = 0; q < 4; ++q) {
      const Vec2 a = v[q], b = v[(q + 1) % 4], d = v[(q + 3) % 4];
      add_cell(cells, id, {a, 0.5 * (a + b), c, 0.5 * (a + d)});
    }
  } else if (v.size() == 6) {
    const Vec2 c = cells[id].centroid;
    for (int q = 0; q < 6; ++q) add_cell(cells, id, {c, v[q], v[(q + 1) % 6]});
  } else {
    const Vec2 ab = 0.5 * (v[0] + v[1]), bc = 0.5 * (v[1] + v[2]), ca = 0.5 * (v[2] + v[0]);
    add_cell(cells, id, {v[0], ab, ca});
    add_cell(cells, id, {ab, v[1], bc});
    add_cell(cells, id, {ca, bc, v[2]});
    add_cell(cells, id, {ab, bc, ca});
  }
}

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Convex polygon with counter-clockwise or clockwise vertices; boundary points count.
bool contains(const TreeCell& c, const Vec2& x, double tol) {
  const std::size_t n = c.vertices.size();
  int pos = 0, neg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = c.vertices[i];
    const Vec2& b = c.vertices[(i + 1) % n];
    const double s = cross(b - a, x - a) / (b - a).norm();
    if (s > tol) ++pos;
    if (s < -tol) ++neg;
  }
  return pos == 0 || neg == 0;
}

}  // namespace

bool Forest::touching(int t, int ct, int s, int cs, int m) const {
  const Vec2 off = trees[t].origin - trees[s].origin - Vec2(0.0, m * H);
  const double tol = 1e-9 * a;
  for (const Vec2& u : cells[ct].vertices)
    for (const Vec2& v : cells[cs].vertices)
      if ((u + off - v).norm() < tol) return true;
  return false;
}

bool Forest::adjacent(int t, int s, int m) const { return touching(t, 0, s, 0, m); }

Forest build_forest(const FundamentalBlock& block, TreeKind kind, int leaf_capacity) {
  const bool square = block.lattice == Lattice::square;
  if (square != (kind == TreeKind::square_quadtree)) throw ConfigError("build_forest: tree kind does not match lattice");
  if (leaf_capacity < 1) throw ConfigError("build_forest: leaf_capacity must be positive");
  Forest f;
  f.kind = kind;
  f.leaf_capacity = leaf_capacity;
  f.a = block.a;
  f.H = block.H;
  std::vector<Vec2> root;
  if (square) {
    const double h = 0.5 * block.a;
    root = {Vec2(h, h), Vec2(-h, h), Vec2(-h, -h), Vec2(h, -h)};
  } else {
    const double r = block.a / std::sqrt(3.0);
    for (int q = 0; q < 6; ++q) root.emplace_back(r * std::cos(q * kPi / 3), r * std::sin(q * kPi / 3));
  }
  add_cell(f.cells, -1, root);
  f.levels = {{0}};

  const double tol = 1e-12 * block.a;
  for (int s = 0; s < block.M(); ++s) {
    BasicTree t;
    t.lattice_cell_index = block.cells[s];
    t.scatterer = s;
    t.origin = block.boundaries[s].center;
    t.element_ids.resize(1);
    for (int e = 0; e < block.N; ++e) t.element_ids[0].push_back(e);
    f.trees.push_back(std::move(t));
  }

  auto level_full = [&](int level) {
    for (int c : f.levels[level])
      for (const BasicTree& t : f.trees)
        if (static_cast<int>(t.element_ids[c].size()) > leaf_capacity) return false;
    return true;
  };
  while (!level_full(f.depth)) {
    if (f.depth == kMaxDepth) throw RangeError("build_forest: leaf capacity not reachable");
    std::vector<int> next;
    for (int c : f.levels[f.depth]) {
      subdivide(f.cells, c, kind);
      for (int ch : f.cells[c].children) next.push_back(ch);
    }
    for (BasicTree& t : f.trees) {
      t.element_ids.resize(f.cells.size());
      for (int c : f.levels[f.depth]) {
        for (int e : t.element_ids[c]) {
          const Vec2 x = block.boundaries[t.scatterer].elements[e].midpoint - t.origin;
          bool placed = false;
          for (int ch : f.cells[c].children) {
            if (contains(f.cells[ch], x, tol)) {
              t.element_ids[ch].push_back(e);
              placed = true;
              break;
            }
          }
          if (!placed) throw StateError("build_forest: element outside its cell");
        }
      }
    }
    f.levels.push_back(std::move(next));
    ++f.depth;
  }

  std::function<void(int, int, int, int, int)> visit = [&](int t, int ct, int s, int cs, int m) {
    if (f.trees[t].element_ids[ct].empty() || f.trees[s].element_ids[cs].empty()) return;
    if (!f.touching(t, ct, s, cs, m)) {
      f.far.push_back({t, ct, s, cs, m});
    } else if (f.cells[ct].level == f.depth) {
      f.near.push_back({t, ct, s, cs, m});
    } else {
      for (int a : f.cells[ct].children)
        for (int b : f.cells[cs].children) visit(t, a, s, b, m);
    }
  };
  const int M = block.M();
  for (int t = 0; t < M; ++t)
    for (int s = 0; s < M; ++s)
      for (int m = -1; m <= 1; ++m) visit(t, 0, s, 0, m);
  return f;
}

Eigen::VectorXcd compute_moments(const Forest& forest, const FundamentalBlock& block, int tree, int cell,
                                 const Eigen::VectorXcd& psi, const WaveContext& ctx, OperatorKind kind, int p) {
  const BasicTree& t = forest.trees[tree];
  const int N = block.N;
  const Vec2 center = t.origin + forest.cells[cell].centroid;
  const bool layer = kind == OperatorKind::D || kind == OperatorKind::T;
  Eigen::VectorXcd m = Eigen::VectorXcd::Zero(2 * p + 1);
  for (int e : t.element_ids[cell]) {
    const Eigen::MatrixXcd a = p2m_matrix(ctx.k, 1.0, block.boundaries[t.scatterer].elements[e], Vec2(0, 0), center, p);
    if (layer) {
      m += a.col(0) * psi(2 * N * t.scatterer + e);
    } else {
      m += a.col(1) * (psi(2 * N * t.scatterer + N + e) / (-kI));
    }
  }
  return m;
}

Eigen::VectorXcd m2l_periodic(const Eigen::VectorXcd& moments, const Vec2& d, const WaveContext& ctx, double H,
                              const LatticeSumConfig& cfg, int p) {
  std::vector<cdouble> z(4 * p + 1);
  lattice_sum_table(2 * p, d, ctx, H, cfg, -1, z);
  return m2l_from_sums(z, p) * moments;
}

FmmOperator prepare_fmm(const Forest& forest, const FundamentalBlock& block, const WaveContext& ctx, int p,
                        double epsilon) {
  if (p < 1) throw DomainError("prepare_fmm: p must be positive");
  FmmOperator op;
  op.p = p;
  op.N = block.N;
  op.M = block.M();
  op.row_scale = derivative_row_scale(ctx);
  op.forest = &forest;
  op.tail = build_tail_channel(block, ctx, 0, epsilon);
  const int T = static_cast<int>(forest.trees.size());
  const int N = block.N;

  // leaves
  std::map<std::pair<int, int>, int> leaf_id;
  op.leaves_of_tree.resize(T);
  for (int t = 0; t < T; ++t) {
    for (int c : forest.levels[forest.depth]) {
      if (forest.trees[t].element_ids[c].empty()) continue;
      leaf_id[{t, c}] = static_cast<int>(op.leaves.size());
      op.leaves_of_tree[t].push_back(static_cast<int>(op.leaves.size()));
      op.leaves.push_back({t, c, forest.trees[t].element_ids[c], {}, {}});
    }
  }
  parallel_for(static_cast<int>(op.leaves.size()), [&](int i) {
    FmmOperator::Leaf& leaf = op.leaves[i];
    const BasicTree& tree = forest.trees[leaf.tree];
    const DiscretizedBoundary& b = block.boundaries[tree.scatterer];
    const Vec2 center = tree.origin + forest.cells[leaf.cell].centroid;
    const int n = static_cast<int>(leaf.ids.size());
    leaf.p2m.resize(2 * p + 1, 2 * n);
    leaf.l2p.resize(2 * n, 2 * p + 1);
    for (int j = 0; j < n; ++j) {
      const BoundaryElement& e = b.elements[leaf.ids[j]];
      const Eigen::MatrixXcd a = p2m_matrix(ctx.k, ctx.eta, e, Vec2(0, 0), center, p);
      leaf.p2m.col(j) = a.col(0);
      leaf.p2m.col(n + j) = a.col(1);
      const Eigen::MatrixXcd r = l2p_matrix(ctx.k, e.midpoint, e.normal, center, p);
      leaf.l2p.row(j) = r.row(0);
      leaf.l2p.row(n + j) = r.row(1);
    }
  });

  // template translations
  op.m2m.resize(forest.cells.size());
  op.l2l.resize(forest.cells.size());
  for (std::size_t c = 1; c < forest.cells.size(); ++c) {
    const Vec2 d = forest.cells[c].centroid - forest.cells[forest.cells[c].parent].centroid;
    op.m2m[c] = m2m_matrix(ctx.k, d, p);
    op.l2l[c] = l2l_matrix(ctx.k, d, p);
  }

  // far links with cached translations
  op.far_of_tree.resize(T);
  const Vec2 h(0.0, block.H);
  const double quantum = 1e-9 * block.a;
  std::vector<Vec2> todo;
  for (const Interaction& it : forest.far) {
    const Vec2 d = (forest.trees[it.target_tree].origin + forest.cells[it.target_cell].centroid) -
                   (forest.trees[it.source_tree].origin + forest.cells[it.source_cell].centroid) - it.m * h;
    const auto [pos, fresh] =
        op.m2l_index.emplace(translation_key(d, quantum), static_cast<int>(op.m2l_index.size()));
    if (fresh) todo.push_back(d);
    op.far_of_tree[it.target_tree].push_back(
        {it.target_cell, it.source_tree, it.source_cell, std::pow(ctx.alpha, it.m), pos->second});
  }
  op.m2l.resize(todo.size());
  parallel_for(static_cast<int>(todo.size()), [&](int i) { op.m2l[i] = m2l_matrix(ctx.k, todo[i], p); });

  // near-field blocks
  op.near_of_tree.resize(T);
  for (const Interaction& it : forest.near) {
    op.near_of_tree[it.target_tree].push_back(
        {leaf_id.at({it.target_tree, it.target_cell}), leaf_id.at({it.source_tree, it.source_cell}), {}});
  }
  std::vector<std::vector<int>> near_m_of_tree(T);
  for (const Interaction& it : forest.near) near_m_of_tree[it.target_tree].push_back(it.m);
  parallel_for(T, [&](int t) {
    for (std::size_t q = 0; q < op.near_of_tree[t].size(); ++q) {
      FmmOperator::NearBlock& nb = op.near_of_tree[t][q];
      const int m = near_m_of_tree[t][q];
      const FmmOperator::Leaf& lt = op.leaves[nb.target_leaf];
      const FmmOperator::Leaf& ls = op.leaves[nb.source_leaf];
      const DiscretizedBoundary& bt = block.boundaries[forest.trees[lt.tree].scatterer];
      const DiscretizedBoundary& bs = block.boundaries[forest.trees[ls.tree].scatterer];
      const bool same = lt.tree == ls.tree && m == 0;
      const cdouble w = std::pow(ctx.alpha, m);
      const Vec2 shift = m * h;
      const int nt = static_cast<int>(lt.ids.size()), ns = static_cast<int>(ls.ids.size());
      nb.block.resize(2 * nt, 2 * ns);
      const cdouble ie = kI * ctx.eta;
      for (int i = 0; i < nt; ++i) {
        const BoundaryElement& ei = bt.elements[lt.ids[i]];
        for (int j = 0; j < ns; ++j) {
          const ElementIntegrals g = integrate_element(ctx.k, bs.elements[ls.ids[j]], shift, ei.midpoint, ei.normal,
                                                       same && lt.ids[i] == ls.ids[j]);
          nb.block(i, j) = w * g.D;
          nb.block(i, ns + j) = -w * ie * g.S;
          nb.block(nt + i, j) = w * g.T;
          nb.block(nt + i, ns + j) = -w * ie * g.K;
        }
      }
    }
  });

  op.diagonal.resize(op.M);
  parallel_for(op.M, [&](int s) {
    op.diagonal[s] = interior_block(block, ctx, s) + Eigen::MatrixXcd::Identity(2 * N, 2 * N);
  });
  op.built = true;
  return op;
}

namespace {

Eigen::VectorXcd gather(const Eigen::VectorXcd& x, int N, int s, const std::vector<int>& ids) {
  const int n = static_cast<int>(ids.size());
  Eigen::VectorXcd out(2 * n);
  for (int j = 0; j < n; ++j) {
    out(j) = x(2 * N * s + ids[j]);
    out(n + j) = x(2 * N * s + N + ids[j]);
  }
  return out;
}

}  // namespace

Eigen::VectorXcd fmm_matvec(const FmmOperator& op, const Eigen::VectorXcd& psi) {
  if (!op.built) throw StateError("fmm_matvec: operator not prepared");
  if (psi.size() != 2 * op.N * op.M) throw ShapeError("fmm_matvec: dimension mismatch");
  const Forest& f = *op.forest;
  const int T = static_cast<int>(f.trees.size());
  const int N = op.N;
  const int P = 2 * op.p + 1;
  const std::size_t C = f.cells.size();

  // upward pass
  std::vector<std::vector<Eigen::VectorXcd>> mom(T, std::vector<Eigen::VectorXcd>(C));
  parallel_for(T, [&](int t) {
    for (std::size_t c = 0; c < C; ++c) mom[t][c] = Eigen::VectorXcd::Zero(P);
    for (int li : op.leaves_of_tree[t]) {
      const FmmOperator::Leaf& leaf = op.leaves[li];
      mom[t][leaf.cell] = leaf.p2m * gather(psi, N, f.trees[t].scatterer, leaf.ids);
    }
    for (int level = f.depth; level > 0; --level)
      for (int c : f.levels[level])
        if (!f.trees[t].element_ids[c].empty()) mom[t][f.cells[c].parent] += op.m2m[c] * mom[t][c];
  });

  // tail moments
  std::vector<Eigen::VectorXcd> tail_mom(op.M);
  for (int s = 0; s < op.M; ++s) tail_mom[s] = op.tail.p2m[s] * psi.segment(2 * N * s, 2 * N);

  Eigen::VectorXcd ext = Eigen::VectorXcd::Zero(psi.size());
  parallel_for(T, [&](int t) {
    const int st = f.trees[t].scatterer;
    std::vector<Eigen::VectorXcd> loc(C, Eigen::VectorXcd::Zero(P));
    for (const FmmOperator::FarLink& l : op.far_of_tree[t])
      loc[l.target_cell] += l.weight * (op.m2l[l.m2l] * mom[l.source_tree][l.source_cell]);
    for (int level = 1; level <= f.depth; ++level)
      for (int c : f.levels[level]) loc[c] += op.l2l[c] * loc[f.cells[c].parent];

    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(2 * N);
    for (int li : op.leaves_of_tree[t]) {
      const FmmOperator::Leaf& leaf = op.leaves[li];
      Eigen::VectorXcd v = leaf.l2p * loc[leaf.cell];
      const int n = static_cast<int>(leaf.ids.size());
      for (int j = 0; j < n; ++j) {
        out(leaf.ids[j]) += v(j);
        out(N + leaf.ids[j]) += v(n + j);
      }
    }
    for (const FmmOperator::NearBlock& nb : op.near_of_tree[t]) {
      const FmmOperator::Leaf& ls = op.leaves[nb.source_leaf];
      const Eigen::VectorXcd v = nb.block * gather(psi, N, f.trees[ls.tree].scatterer, ls.ids);
      const std::vector<int>& ids = op.leaves[nb.target_leaf].ids;
      const int n = static_cast<int>(ids.size());
      for (int j = 0; j < n; ++j) {
        out(ids[j]) += v(j);
        out(N + ids[j]) += v(n + j);
      }
    }
    Eigen::VectorXcd tl = Eigen::VectorXcd::Zero(2 * op.tail.p + 1);
    for (int s = 0; s < op.M; ++s) {
      const Vec2 d = f.trees[t].origin - f.trees[s].origin;
      const auto it = op.tail.m2l.find(translation_key(d, op.tail.quantum));
      tl += it->second * tail_mom[f.trees[s].scatterer];
    }
    out += op.tail.l2p[st] * tl;
    out.tail(N) *= op.row_scale;
    out += op.diagonal[st] * psi.segment(2 * N * st, 2 * N);
    ext.segment(2 * N * st, 2 * N) = out;
  });
  return ext;
}

ErrorModel error_model_lookup(TreeKind kind, int layer_offset) {
  if (kind == TreeKind::square_quadtree) {
    switch (layer_offset) {
      case 0: return {0.4714, 0.6009, 0.6009};
      case 1: return {0.7071, 0.6374, 0.7071};
      case 2: return {0.9428, 0.6640, 0.9428};
      default: break;
    }
  } else {
    switch (layer_offset) {
      case 0: return {0.4000, 0.6663, 0.6663};
      case 1: return {0.7559, 0.6863, 0.7559};
      default: break;
    }
  }
  throw RangeError("error_model_lookup: unsupported tree kind and layer offset");
}

}  // namespace pfmbem
