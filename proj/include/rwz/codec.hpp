#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include "rwz/image.hpp"
#include "rwz/parallel.hpp"

namespace rwz::codec {

/// The 16 selectable per-block output dimensions (real coefficient counts),
/// an even geometric ladder from 4 to 128.
struct DimensionBank {
  std::array<int, 16> dims;

  static DimensionBank default_bank();
  int max_dim() const { return dims[15]; }
  int min_dim() const { return dims[0]; }
  /// Index of `dim` in the ladder, or -1.
  int level_of(int dim) const;
};

struct BlockAllocation {
  int block_index = -1;
  int selected_dim = 0;
  /// Per-kept-coefficient scale model (squared magnitudes), shared with the
  /// decoder as error-free metadata.
  std::vector<double> coeff_variances;
};

/// Block layout of a padded image: channel-major, then block rows, then
/// block columns. height/width are the original (unpadded) image dims.
struct BlockGrid {
  int rows = 0, cols = 0, channels = 0, block_size = 0;
  int height = 0, width = 0;
  int count() const { return rows * cols * channels; }
};

struct Partition {
  BlockGrid grid;
  /// count() blocks of block_size^2 samples each, zero-padded at the frame.
  std::vector<std::vector<double>> blocks;
  /// Fraction of mask-true pixels per block (same value for every channel).
  std::vector<double> occupancy;
};

Partition block_partition(const Image& img, const Mask& m, int block_size);

/// 2-D orthonormal DCT of a B x B block (row-major pixels), coefficients
/// returned in zig-zag order. Energy preserving.
std::vector<double> forward_transform(const std::vector<double>& block);

/// Exact inverse of forward_transform.
std::vector<double> inverse_transform(const std::vector<double>& coeffs);

/// Batch transforms, parallel over blocks; used by encode/decode and the
/// kernel benchmark. Serial execution is the reference ordering.
std::vector<std::vector<double>> forward_blocks(
    const std::vector<std::vector<double>>& blocks,
    par::Exec ex = par::Exec::Parallel);
std::vector<std::vector<double>> inverse_blocks(
    const std::vector<std::vector<double>>& coeff_blocks,
    par::Exec ex = par::Exec::Parallel);

/// Gaussian rate proxy: sum of 0.5*log2(1 + c_i^2/q^2) bits over
/// coefficients, each squared magnitude treated as the component's scale.
double estimate_entropy(const std::vector<double>& coeffs, double q);

/// Greedy symbol-budget split. Every block with occupancy > 0 starts at the
/// smallest bank dimension; the remaining complex-symbol budget repeatedly
/// upgrades the block with the highest (entropy x occupancy) per added
/// symbol, ties to the lower block index, until nothing more fits. Blocks
/// never exceed max_dim (pass 2*B^2 when blocks are smaller than the bank
/// top). Throws when budget_k cannot cover the floor.
std::vector<BlockAllocation> allocate_rate(
    const std::vector<double>& entropies, const std::vector<double>& occupancy,
    const DimensionBank& bank, long budget_k, int max_dim = 128);

struct EncodedPayload {
  /// Concatenated per-block complex symbols, pre power normalization;
  /// real part = even zig-zag coefficient, imaginary = odd.
  std::vector<std::complex<double>> symbols;
  std::vector<BlockAllocation> allocations;  // transmitted blocks only
  BlockGrid grid;
  /// The transmit mask. Shared state with the receiver (it regenerates the
  /// mask from the homography), so serialization omits it.
  Mask mask;

  long symbol_count() const { return static_cast<long>(symbols.size()); }
};

EncodedPayload encode(const Image& residual, const Mask& m,
                      const DimensionBank& bank, long budget_k, int block_size,
                      double q);

/// Inverse of encode given the payload metadata: per-coefficient linear-MMSE
/// shrinkage c_i = v_i/(v_i + noise_var) * r_i with v_i from
/// coeff_variances, inverse transform, block reassembly, and final masking.
/// noise_var is the per-real-component noise variance in the same (unscaled)
/// domain as payload.symbols; pass 0 for a noiseless channel.
Image decode(const std::vector<std::complex<double>>& received,
             const EncodedPayload& payload, double noise_var);

/// Wire format, little-endian: u32 height, width, channels; u8 block_size,
/// bank id; u8 bank-level index per grid block (0xFF = untransmitted); f32
/// coefficient variances per transmitted block; then the symbols as f32
/// (re, im) pairs.
std::vector<std::uint8_t> serialize(const EncodedPayload& payload);

/// Parses the serialize() format. The mask is not on the wire (the receiver
/// derives it from the shared homography), so the returned payload carries
/// an empty mask and decode skips the final masking step.
EncodedPayload deserialize(const std::vector<std::uint8_t>& bytes);

/// Size of everything in the wire format except the symbols: the error-free
/// side metadata the CBR ledger reports separately.
std::size_t metadata_bytes(const EncodedPayload& payload);

}  // namespace rwz::codec
