#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "bdd/block_matrix.hpp"
#include "bdd/expander.hpp"

namespace bdd {

// Sparse vector of r x r demand blocks; indices absent from blocks are zero.
// The product block Laplacian of d couples every pair of nonzero entries:
//
//   L[i,j] = -d_i d_j^*  (i != j),   L[i,i] = ||d_i|| (sum_{k != i} ||d_k||) I_r
//
// with operator norms throughout. For r = 1 and positive reals this is the
// Laplacian of the complete graph with edge weights d_i d_j.
struct BlockDemandVector {
  int n = 0;
  int r = 1;
  std::vector<std::pair<int, Block>> blocks;  // index-ascending, nonzero
};

// validates, sorts by index, drops exactly-zero blocks
BlockDemandVector make_demand(int n, int r, std::vector<std::pair<int, Block>> blocks);

// dense-support oracle; n^2 blocks, test scale only. Fewer than two nonzero
// blocks give a matrix with no stored blocks.
BlockSparseMatrix product_block_laplacian(const BlockDemandVector& d);

// Bipartite variant over the split (f, complement of f): pairs on the same
// side do not couple, and each diagonal weighs the opposite side only.
BlockSparseMatrix bipartite_product_block_laplacian(const BlockDemandVector& d,
                                                    const std::vector<int>& f);

// Sparse replacement for product_block_laplacian: a weighted expander H on
// the norms w_i = ||d_i|| supplies scalar edges h, and each edge contributes
//
//   L[i,i] += h I_r,   L[j,j] += h I_r,   L[i,j] -= (h / (w_i w_j)) d_i d_j^*
//
// The map from H to this L is a frame conjugation through the unitary halves
// of each d_i (see k2_cover and unitary_split), so the Loewner error of the
// output against the product Laplacian is at most the scalar expander's; all
// looseness lives in weighted_expander. When the expander is in its exact
// regime the output reproduces product_block_laplacian(d) bit for bit. Zero
// blocks stay isolated. Requires at least two nonzero blocks.
BlockSparseMatrix clique_sparsification(const BlockDemandVector& d, double epsilon,
                                        uint64_t seed);

// as above against bipartite_product_block_laplacian; the [f,f] and [c,c]
// corners stay block-diagonal exactly, and each side needs a nonzero block
BlockSparseMatrix bipartite_clique_sparsification(const BlockDemandVector& d,
                                                  const std::vector<int>& f,
                                                  double epsilon, uint64_t seed);

// Vertex-doubled cover behind the frame argument: i splits into 2i and
// 2i + 1, and each edge (i, j, w) becomes the four cross edges between the
// copies of i and j, each at weight w. Densely
//
//   L_cover = L (x) [[1,1],[1,1]] + D (x) [[1,-1],[-1,1]]
//
// with D the diagonal of weighted degrees. Test support; self-loops are
// rejected.
WeightedGraph k2_cover(const WeightedGraph& g);

}  // namespace bdd
