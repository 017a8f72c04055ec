#include "rwz/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

#include "rwz/errors.hpp"

namespace rwz::codec {

namespace {

// Zig-zag scan order for a B x B block: list of row-major indices.
std::vector<int> zigzag_order(int b) {
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(b) * b);
  for (int s = 0; s < 2 * b - 1; ++s) {
    if (s % 2 == 0) {
      for (int y = std::min(s, b - 1); y >= std::max(0, s - b + 1); --y)
        order.push_back(y * b + (s - y));
    } else {
      for (int y = std::max(0, s - b + 1); y <= std::min(s, b - 1); ++y)
        order.push_back(y * b + (s - y));
    }
  }
  return order;
}

// Orthonormal DCT-II basis matrix, c(u, x).
std::vector<double> dct_matrix(int b) {
  std::vector<double> m(static_cast<std::size_t>(b) * b);
  const double norm0 = std::sqrt(1.0 / b), norm = std::sqrt(2.0 / b);
  for (int u = 0; u < b; ++u)
    for (int x = 0; x < b; ++x)
      m[static_cast<std::size_t>(u) * b + x] =
          (u == 0 ? norm0 : norm) *
          std::cos(std::numbers::pi * (2 * x + 1) * u / (2.0 * b));
  return m;
}

struct Tables {
  int b;
  std::vector<double> dct;
  std::vector<int> zigzag;
};

const Tables& tables_for(int b) {
  thread_local Tables t{0, {}, {}};
  if (t.b != b) t = {b, dct_matrix(b), zigzag_order(b)};
  return t;
}

int block_side(std::size_t n) {
  const int b = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (b <= 0 || static_cast<std::size_t>(b) * b != n)
    throw ConfigError("block length is not a perfect square");
  return b;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 24));
}

void put_f32(std::vector<std::uint8_t>& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t& pos) {
  if (pos + 4 > in.size()) throw IoError("truncated payload");
  const std::uint32_t v = in[pos] | (in[pos + 1] << 8) | (in[pos + 2] << 16) |
                          (static_cast<std::uint32_t>(in[pos + 3]) << 24);
  pos += 4;
  return v;
}

float get_f32(const std::vector<std::uint8_t>& in, std::size_t& pos) {
  const std::uint32_t bits = get_u32(in, pos);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

constexpr std::uint8_t kUntransmitted = 0xFF;
constexpr std::uint8_t kDefaultBankId = 0;

}  // namespace

DimensionBank DimensionBank::default_bank() {
  // Geometric ladder round(4 * 32^(j/15)) snapped to the nearest even value;
  // collisions bump up by 2 so the ladder stays strictly increasing.
  DimensionBank bank{};
  int prev = 0;
  for (int j = 0; j < 16; ++j) {
    const double target = 4.0 * std::pow(32.0, j / 15.0);
    int d = 2 * static_cast<int>(std::llround(target / 2.0));
    if (d <= prev) d = prev + 2;
    bank.dims[j] = d;
    prev = d;
  }
  return bank;
}

int DimensionBank::level_of(int dim) const {
  for (int j = 0; j < 16; ++j)
    if (dims[j] == dim) return j;
  return -1;
}

Partition block_partition(const Image& img, const Mask& m, int block_size) {
  if (block_size <= 0) throw ConfigError("block size must be positive");
  if (img.height() != m.height() || img.width() != m.width())
    throw ConfigError("mask shape does not match image");
  const int b = block_size;
  Partition part;
  part.grid.block_size = b;
  part.grid.height = img.height();
  part.grid.width = img.width();
  part.grid.channels = img.channels();
  part.grid.rows = (img.height() + b - 1) / b;
  part.grid.cols = (img.width() + b - 1) / b;

  const int nblocks = part.grid.count();
  part.blocks.assign(nblocks, std::vector<double>(static_cast<std::size_t>(b) * b, 0.0));
  part.occupancy.assign(nblocks, 0.0);

  for (int c = 0; c < img.channels(); ++c) {
    for (int by = 0; by < part.grid.rows; ++by) {
      for (int bx = 0; bx < part.grid.cols; ++bx) {
        const int idx = c * part.grid.rows * part.grid.cols +
                        by * part.grid.cols + bx;
        auto& blk = part.blocks[idx];
        int true_count = 0;
        for (int yy = 0; yy < b; ++yy) {
          for (int xx = 0; xx < b; ++xx) {
            const int y = by * b + yy, x = bx * b + xx;
            if (y >= img.height() || x >= img.width()) continue;
            blk[static_cast<std::size_t>(yy) * b + xx] = img.at(y, x, c);
            if (m.at(y, x)) ++true_count;
          }
        }
        part.occupancy[idx] = static_cast<double>(true_count) / (b * b);
      }
    }
  }
  return part;
}

std::vector<double> forward_transform(const std::vector<double>& block) {
  const int b = block_side(block.size());
  const Tables& t = tables_for(b);
  // Separable transform: rows, then columns.
  std::vector<double> tmp(block.size()), freq(block.size());
  for (int y = 0; y < b; ++y)
    for (int u = 0; u < b; ++u) {
      double s = 0.0;
      for (int x = 0; x < b; ++x)
        s += t.dct[static_cast<std::size_t>(u) * b + x] *
             block[static_cast<std::size_t>(y) * b + x];
      tmp[static_cast<std::size_t>(y) * b + u] = s;
    }
  for (int u = 0; u < b; ++u)
    for (int v = 0; v < b; ++v) {
      double s = 0.0;
      for (int y = 0; y < b; ++y)
        s += t.dct[static_cast<std::size_t>(v) * b + y] *
             tmp[static_cast<std::size_t>(y) * b + u];
      freq[static_cast<std::size_t>(v) * b + u] = s;
    }
  std::vector<double> out(block.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = freq[t.zigzag[i]];
  return out;
}

std::vector<double> inverse_transform(const std::vector<double>& coeffs) {
  const int b = block_side(coeffs.size());
  const Tables& t = tables_for(b);
  std::vector<double> freq(coeffs.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) freq[t.zigzag[i]] = coeffs[i];
  std::vector<double> tmp(coeffs.size()), out(coeffs.size());
  for (int u = 0; u < b; ++u)
    for (int y = 0; y < b; ++y) {
      double s = 0.0;
      for (int v = 0; v < b; ++v)
        s += t.dct[static_cast<std::size_t>(v) * b + y] *
             freq[static_cast<std::size_t>(v) * b + u];
      tmp[static_cast<std::size_t>(y) * b + u] = s;
    }
  for (int y = 0; y < b; ++y)
    for (int x = 0; x < b; ++x) {
      double s = 0.0;
      for (int u = 0; u < b; ++u)
        s += t.dct[static_cast<std::size_t>(u) * b + x] *
             tmp[static_cast<std::size_t>(y) * b + u];
      out[static_cast<std::size_t>(y) * b + x] = s;
    }
  return out;
}

std::vector<std::vector<double>> forward_blocks(
    const std::vector<std::vector<double>>& blocks, par::Exec ex) {
  std::vector<std::vector<double>> out(blocks.size());
  par::for_index(ex, static_cast<std::ptrdiff_t>(blocks.size()),
                 [&](std::ptrdiff_t i) { out[i] = forward_transform(blocks[i]); });
  return out;
}

std::vector<std::vector<double>> inverse_blocks(
    const std::vector<std::vector<double>>& coeff_blocks, par::Exec ex) {
  std::vector<std::vector<double>> out(coeff_blocks.size());
  par::for_index(ex, static_cast<std::ptrdiff_t>(coeff_blocks.size()),
                 [&](std::ptrdiff_t i) { out[i] = inverse_transform(coeff_blocks[i]); });
  return out;
}

double estimate_entropy(const std::vector<double>& coeffs, double q) {
  if (q <= 0.0) throw ConfigError("entropy scale q must be positive");
  double bits = 0.0;
  const double q2 = q * q;
  for (double c : coeffs)
    bits += std::max(0.0, 0.5 * std::log2(1.0 + c * c / q2));
  return bits;
}

std::vector<BlockAllocation> allocate_rate(const std::vector<double>& entropies,
                                           const std::vector<double>& occupancy,
                                           const DimensionBank& bank,
                                           long budget_k, int max_dim) {
  if (entropies.size() != occupancy.size())
    throw ConfigError("entropy and occupancy lists must align");
  const int n = static_cast<int>(entropies.size());

  std::vector<int> tx;  // indices of transmitted blocks
  for (int i = 0; i < n; ++i)
    if (occupancy[i] > 0.0) tx.push_back(i);

  if (max_dim < bank.min_dim())
    throw ConfigError("blocks too small for the smallest bank dimension");
  const long floor_cost =
      static_cast<long>(tx.size()) * (bank.min_dim() / 2);
  if (budget_k < floor_cost)
    throw ConfigError("budget below the allocation floor");

  // Highest bank level each block may reach.
  int cap_level = 0;
  for (int j = 0; j < 16; ++j)
    if (bank.dims[j] <= max_dim) cap_level = j;

  std::vector<int> level(tx.size(), 0);
  long spent = static_cast<long>(tx.size()) * (bank.min_dim() / 2);

  // Greedy upgrades: value of one level step is (entropy x occupancy) per
  // added complex symbol. Re-scanning per step is fine at desk scale.
  while (true) {
    int pick = -1;
    double pick_gain = -1.0;
    long pick_cost = 0;
    for (std::size_t k = 0; k < tx.size(); ++k) {
      if (level[k] >= cap_level) continue;
      const long step =
          (bank.dims[level[k] + 1] - bank.dims[level[k]]) / 2;
      if (spent + step > budget_k) continue;
      const double gain = entropies[tx[k]] * occupancy[tx[k]] /
                          static_cast<double>(step);
      if (gain > pick_gain) {
        pick_gain = gain;
        pick = static_cast<int>(k);
        pick_cost = step;
      }
    }
    if (pick < 0) break;
    ++level[static_cast<std::size_t>(pick)];
    spent += pick_cost;
  }

  std::vector<BlockAllocation> out;
  out.reserve(tx.size());
  for (std::size_t k = 0; k < tx.size(); ++k)
    out.push_back({tx[k], bank.dims[level[k]], {}});
  return out;
}

EncodedPayload encode(const Image& residual, const Mask& m,
                      const DimensionBank& bank, long budget_k, int block_size,
                      double q) {
  EncodedPayload payload;
  Partition part = block_partition(residual, m, block_size);
  payload.grid = part.grid;
  payload.mask = m;

  const int ncoeff = block_size * block_size;
  std::vector<std::vector<double>> coeffs = forward_blocks(part.blocks);

  std::vector<double> entropies(coeffs.size(), 0.0);
  par::for_index(static_cast<std::ptrdiff_t>(coeffs.size()),
                 [&](std::ptrdiff_t i) {
                   if (part.occupancy[i] > 0.0)
                     entropies[i] = estimate_entropy(coeffs[i], q);
                 });

  payload.allocations = allocate_rate(entropies, part.occupancy, bank,
                                      budget_k, std::min(2 * ncoeff, bank.max_dim()));

  for (auto& alloc : payload.allocations) {
    const auto& c = coeffs[alloc.block_index];
    const int kept = std::min(alloc.selected_dim, ncoeff);
    alloc.coeff_variances.resize(kept);
    for (int i = 0; i < kept; ++i) alloc.coeff_variances[i] = c[i] * c[i];
    for (int i = 0; i < alloc.selected_dim; i += 2) {
      const double re = i < ncoeff ? c[i] : 0.0;
      const double im = i + 1 < ncoeff ? c[i + 1] : 0.0;
      payload.symbols.emplace_back(re, im);
    }
  }
  return payload;
}

Image decode(const std::vector<std::complex<double>>& received,
             const EncodedPayload& payload, double noise_var) {
  if (noise_var < 0.0) throw ConfigError("noise variance must be nonnegative");
  long expected = 0;
  for (const auto& a : payload.allocations) expected += a.selected_dim / 2;
  if (static_cast<long>(received.size()) != expected)
    throw ConfigError("received length does not match allocations");

  const BlockGrid& g = payload.grid;
  const int b = g.block_size;
  const int ncoeff = b * b;

  // Per-block starting offsets into the symbol stream.
  std::vector<long> offsets(payload.allocations.size());
  long off = 0;
  for (std::size_t k = 0; k < payload.allocations.size(); ++k) {
    offsets[k] = off;
    off += payload.allocations[k].selected_dim / 2;
  }

  std::vector<std::vector<double>> coeff_blocks(
      g.count(), std::vector<double>(static_cast<std::size_t>(ncoeff), 0.0));
  par::for_index(
      static_cast<std::ptrdiff_t>(payload.allocations.size()),
      [&](std::ptrdiff_t k) {
        const BlockAllocation& alloc = payload.allocations[k];
        auto& c = coeff_blocks[alloc.block_index];
        const int kept = std::min(alloc.selected_dim, ncoeff);
        for (int i = 0; i < kept; ++i) {
          const std::complex<double>& s = received[offsets[k] + i / 2];
          const double r = (i % 2 == 0) ? s.real() : s.imag();
          const double v = alloc.coeff_variances[i];
          c[i] = (v + noise_var) > 0.0 ? v / (v + noise_var) * r : 0.0;
        }
      });

  std::vector<std::vector<double>> pixel_blocks = inverse_blocks(coeff_blocks);

  std::vector<double> samples(
      static_cast<std::size_t>(g.height) * g.width * g.channels, 0.0);
  for (int c = 0; c < g.channels; ++c)
    for (int by = 0; by < g.rows; ++by)
      for (int bx = 0; bx < g.cols; ++bx) {
        const auto& blk =
            pixel_blocks[c * g.rows * g.cols + by * g.cols + bx];
        for (int yy = 0; yy < b; ++yy)
          for (int xx = 0; xx < b; ++xx) {
            const int y = by * b + yy, x = bx * b + xx;
            if (y >= g.height || x >= g.width) continue;
            samples[(static_cast<std::size_t>(y) * g.width + x) * g.channels +
                    c] = blk[static_cast<std::size_t>(yy) * b + xx];
          }
      }
  Image out(g.height, g.width, g.channels, std::move(samples));
  if (out.height() == payload.mask.height() &&
      out.width() == payload.mask.width())
    out = apply_mask(out, payload.mask);
  return out;
}

std::vector<std::uint8_t> serialize(const EncodedPayload& payload) {
  std::vector<std::uint8_t> out;
  const BlockGrid& g = payload.grid;
  put_u32(out, static_cast<std::uint32_t>(g.height));
  put_u32(out, static_cast<std::uint32_t>(g.width));
  put_u32(out, static_cast<std::uint32_t>(g.channels));
  out.push_back(static_cast<std::uint8_t>(g.block_size));
  out.push_back(kDefaultBankId);

  const DimensionBank bank = DimensionBank::default_bank();
  std::vector<std::uint8_t> levels(static_cast<std::size_t>(g.count()),
                                   kUntransmitted);
  for (const auto& a : payload.allocations) {
    const int lvl = bank.level_of(a.selected_dim);
    if (lvl < 0) throw ConfigError("allocation dim not in the bank");
    levels[static_cast<std::size_t>(a.block_index)] =
        static_cast<std::uint8_t>(lvl);
  }
  out.insert(out.end(), levels.begin(), levels.end());

  for (const auto& a : payload.allocations)
    for (double v : a.coeff_variances) put_f32(out, static_cast<float>(v));

  for (const auto& s : payload.symbols) {
    put_f32(out, static_cast<float>(s.real()));
    put_f32(out, static_cast<float>(s.imag()));
  }
  return out;
}

EncodedPayload deserialize(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  EncodedPayload p;
  p.grid.height = static_cast<int>(get_u32(bytes, pos));
  p.grid.width = static_cast<int>(get_u32(bytes, pos));
  p.grid.channels = static_cast<int>(get_u32(bytes, pos));
  if (pos + 2 > bytes.size()) throw IoError("truncated payload");
  p.grid.block_size = bytes[pos++];
  const std::uint8_t bank_id = bytes[pos++];
  if (bank_id != kDefaultBankId) throw IoError("unknown dimension bank");
  if (p.grid.block_size <= 0 || p.grid.height <= 0 || p.grid.width <= 0 ||
      (p.grid.channels != 1 && p.grid.channels != 3))
    throw IoError("malformed payload header");
  p.grid.rows = (p.grid.height + p.grid.block_size - 1) / p.grid.block_size;
  p.grid.cols = (p.grid.width + p.grid.block_size - 1) / p.grid.block_size;

  const DimensionBank bank = DimensionBank::default_bank();
  const int nblocks = p.grid.count();
  if (pos + static_cast<std::size_t>(nblocks) > bytes.size())
    throw IoError("truncated payload");
  const int ncoeff = p.grid.block_size * p.grid.block_size;
  for (int i = 0; i < nblocks; ++i) {
    const std::uint8_t lvl = bytes[pos++];
    if (lvl == kUntransmitted) continue;
    if (lvl >= 16) throw IoError("bad bank level");
    p.allocations.push_back({i, bank.dims[lvl], {}});
  }
  for (auto& a : p.allocations) {
    const int kept = std::min(a.selected_dim, ncoeff);
    a.coeff_variances.resize(kept);
    for (int i = 0; i < kept; ++i)
      a.coeff_variances[i] = get_f32(bytes, pos);
  }
  long nsym = 0;
  for (const auto& a : p.allocations) nsym += a.selected_dim / 2;
  p.symbols.reserve(static_cast<std::size_t>(nsym));
  for (long i = 0; i < nsym; ++i) {
    const double re = get_f32(bytes, pos);
    const double im = get_f32(bytes, pos);
    p.symbols.emplace_back(re, im);
  }
  return p;
}

std::size_t metadata_bytes(const EncodedPayload& payload) {
  std::size_t vars = 0;
  for (const auto& a : payload.allocations) vars += a.coeff_variances.size();
  return 4u * 3u + 2u + static_cast<std::size_t>(payload.grid.count()) +
         4u * vars;
}

}  // namespace rwz::codec
