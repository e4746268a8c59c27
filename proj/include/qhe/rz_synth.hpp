#pragma once

// Clifford+T synthesis of R_Z rotations.
//
// Angles that are exact multiples of pi/4 map to zero-error words built from
// {Z, S, T}.  Everything else goes through a meet-in-the-middle search:
// a breadth-first table of reduced <H,T> half-words (no HH, T-runs <= 7),
// deduplicated modulo global phase, is combined into candidate words
// W = B o A o C -- two searched halves plus a short third factor -- whose
// product lies within a narrow tube around the R_Z circle.  Matching uses the
// invariants of left-multiplication by R_Z: (|alpha|, arg beta - arg alpha)
// of the SU(2) representative are unchanged, so for each target A o C the
// compatible B's sit in a thin key window found by bisection over sorted key
// rows.  Kept candidates land in an angle-indexed atlas, one per (angle
// bucket, raw length) cell; a query walks the buckets around the requested
// angle plus a dyadic tail, re-verifies each candidate by multiplying out its
// word, and returns the shortest verified one.  The distance metric
// throughout is d(U,V) = sqrt(1 - |tr(U^dag V)|/2), evaluated in its
// phase-aligned Frobenius form for stability near zero.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <list>
#include <mutex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "qhe/gate.hpp"
#include "qhe/rng.hpp"
#include "qhe/unitary.hpp"

namespace qhe {

struct SynthConfig {
  enum class Backend { exact_dyadic, search };

  double epsilon = 1e-2;       // per-gate distance bound, in (0, 0.5]
  Backend backend = Backend::search;
  int max_search_depth = 40;   // cap on each half-word of the search, <= 40
};

struct SynthResult {
  std::vector<GateKind> word;  // temporal order, over {Z, S, T, H}
  double dist = 0.0;
  std::size_t t_count = 0;
  std::size_t search_length = 0;  // half-word lengths + dyadic tail, pre-collapse
};

class SynthExhausted : public std::runtime_error {
 public:
  SynthExhausted(double requested, double best)
      : std::runtime_error("rz synthesis exhausted: best achieved distance " +
                           std::to_string(best) + " exceeds epsilon " +
                           std::to_string(requested)),
        requested_epsilon(requested),
        best_dist(best) {}

  double requested_epsilon;
  double best_dist;
};

namespace synth_detail {

constexpr double kPi = std::numbers::pi;
constexpr double kSector = kPi / 4.0;

// T^k modulo global phase as a {Z,S,T} word, exact.
inline const std::vector<GateKind>& dyadic_word(int k) {
  static const std::vector<GateKind> words[8] = {
      {},
      {GateKind::T},
      {GateKind::S},
      {GateKind::S, GateKind::T},
      {GateKind::Z},
      {GateKind::Z, GateKind::T},
      {GateKind::Z, GateKind::S},
      {GateKind::Z, GateKind::S, GateKind::T}};
  return words[k & 7];
}

inline double wrap_2pi(double a) {
  a = std::fmod(a, 2 * kPi);
  if (a < 0) a += 2 * kPi;
  return a;
}

constexpr double kSnapTol = 1e-12;  // |theta - k pi/4| below this is exact

inline bool snaps_dyadic(double theta) {
  const double tn = wrap_2pi(theta);
  return std::abs(tn - std::llround(tn / kSector) * kSector) <= kSnapTol;
}

class Engine {
 public:
  static Engine& instance() {
    static Engine e;
    return e;
  }

  SynthResult query(double theta, const SynthConfig& cfg) {
    std::lock_guard<std::mutex> lock(mu_);
    if (!(cfg.epsilon > 0.0) || cfg.epsilon > 0.5)
      throw std::invalid_argument("SynthConfig: epsilon must be in (0, 0.5]");
    if (cfg.max_search_depth < 1 || cfg.max_search_depth > kMaxHalf)
      throw std::invalid_argument(
          "SynthConfig: max_search_depth must be in [1, 40]");
    if (!std::isfinite(theta))
      throw std::invalid_argument("synthesize_rz: non-finite angle");

    const double tn = wrap_2pi(theta);
    const int k_near = static_cast<int>(std::llround(tn / kSector));
    if (std::abs(tn - k_near * kSector) <= kSnapTol)
      return finish(dyadic_word(k_near & 7), 0, tn);
    if (cfg.backend == SynthConfig::Backend::exact_dyadic)
      throw std::invalid_argument(
          "exact_dyadic backend requires theta = k*pi/4");

    const int k = static_cast<int>(tn / kSector);  // tn in [0, 2pi)
    const double phi0 = tn - k * kSector;

    if (auto hit = cache_get(phi0, cfg)) {
      SynthResult r = rebuild(*hit, k, tn);
      if (r.dist <= cfg.epsilon) return r;
    }

    ensure_atlas();
    SynthResult r;
    Core core;
    double best_d = 1.0;
    if (scan(tn, phi0, k, cfg, r, core, best_d)) {
      cache_put(phi0, cfg, core);
      return r;
    }
    throw SynthExhausted(cfg.epsilon, best_d);
  }

 private:
  // ---- BFS table of reduced <H,T> words, canonical modulo global phase ----

  struct Entry {
    double ar, ai, br, bi;  // SU(2) representative [[a, b], [-conj b, conj a]]
    std::uint32_t parent;
    std::uint8_t gate;      // 0 = root, 1 = H, 2 = T
    std::uint8_t len;
    std::uint8_t t_run;
  };

  static constexpr int kMaxHalf = 40;
  static constexpr int kDictLen = 4;        // short third factor, assembly only
  static constexpr double kTube = 1.0e-3;   // kept distance-to-circle band
  static constexpr double kStrip = 2.0e-3;  // |alpha| strip width for the merge
  static constexpr double kChiCap = 0.05;   // chi window clamp near diagonals
  static constexpr int kBuckets = 16384;    // angle buckets over [0, pi/4)
  static constexpr int kLenSlots = 96;      // raw word length 0..85
  static constexpr std::uint32_t kNone = 0xffffffffu;

  Engine() {
    seen_.reserve(std::size_t{2} << 20);
    table_.push_back({1.0, 0.0, 0.0, 0.0, kNone, 0, 0, 0});
    len_start_ = {0, 1};
    seen_.emplace(quat_hash(1.0, 0.0, 0.0, 0.0), 0u);
  }

  static void canonicalize(double (&v)[4]) {
    for (double c : v) {
      if (std::abs(c) > 1e-9) {
        if (c < 0)
          for (double& t : v) t = -t;
        break;
      }
    }
  }

  static std::uint64_t quat_hash(double w, double x, double y, double z) {
    double v[4] = {w, x, y, z};
    canonicalize(v);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double c : v) {
      auto u = static_cast<std::uint64_t>(std::llround(c * 1e6) + (1 << 21));
      h = (h ^ u) * 0x100000001b3ULL;
      h ^= h >> 29;
    }
    return h;
  }

  void try_child(std::uint32_t parent, int gate) {
    const Entry& p = table_[parent];
    const cplx a(p.ar, p.ai), b(p.br, p.bi);
    cplx a2, b2;
    if (gate == 1) {  // H as SU(2): (i/sqrt2) [[1, 1], [1, -1]]
      const cplx ir(0.0, std::numbers::sqrt2 / 2.0);
      a2 = ir * a - ir * std::conj(b);
      b2 = ir * b + ir * std::conj(a);
    } else {  // T as SU(2): diag(e^{-i pi/8}, e^{i pi/8})
      const cplx ph = std::polar(1.0, -kPi / 8);
      a2 = ph * a;
      b2 = ph * b;
    }
    std::uint64_t h = quat_hash(a2.real(), a2.imag(), b2.real(), b2.imag());
    if (!seen_.emplace(h, static_cast<std::uint32_t>(table_.size())).second)
      return;
    double v[4] = {a2.real(), a2.imag(), b2.real(), b2.imag()};
    canonicalize(v);  // stored sign-fixed so pair products are reproducible
    Entry e;
    e.ar = v[0];
    e.ai = v[1];
    e.br = v[2];
    e.bi = v[3];
    e.parent = parent;
    e.gate = static_cast<std::uint8_t>(gate);
    e.len = static_cast<std::uint8_t>(p.len + 1);
    e.t_run = gate == 2 ? static_cast<std::uint8_t>(p.t_run + 1) : 0;
    table_.push_back(e);
  }

  void ensure_table() {
    while (built_len_ < kMaxHalf) {
      const auto lo = len_start_[static_cast<std::size_t>(built_len_)];
      const auto hi = len_start_[static_cast<std::size_t>(built_len_) + 1];
      for (std::size_t i = lo; i < hi; ++i) {
        if (table_[i].gate != 1) try_child(static_cast<std::uint32_t>(i), 1);
        if (table_[i].t_run < 7) try_child(static_cast<std::uint32_t>(i), 2);
      }
      len_start_.push_back(table_.size());
      ++built_len_;
    }
  }

  // ---- angle atlas ----
  //
  // Candidate words are W = B * A * C with A, B drawn from the full table and
  // C from the short-word dictionary (length <= kDictLen, identity included),
  // kept only when W lies within kTube of the R_Z circle.  The atlas stores,
  // per (angle bucket, raw length) cell, the in-tube candidate of smallest
  // circle distance; the tube is narrow enough that cells stay near-unique,
  // and queries above the tube radius draw on angle-offset volume instead.

  struct Rec {
    // a:20 | b:20 | c:6 | k:3 | lenA:6 | lenB:6  (a, b, c index the table)
    std::uint64_t w = 0;
    float ds2 = 1e30f;  // squared distance of W to the R_Z circle; 1e30 = empty
    float phi0 = 0.0f;  // sector-folded best-fit angle
  };

  static constexpr std::uint64_t pack_rec(std::size_t a, std::size_t b,
                                          std::size_t c, int k, int len_a,
                                          int len_b) {
    return static_cast<std::uint64_t>(a) | static_cast<std::uint64_t>(b) << 20 |
           static_cast<std::uint64_t>(c) << 40 |
           static_cast<std::uint64_t>(k & 7) << 46 |
           static_cast<std::uint64_t>(len_a) << 49 |
           static_cast<std::uint64_t>(len_b) << 55;
  }

  void add_candidate(std::size_t a_idx, std::size_t b_idx, std::size_t c_idx,
                     const cplx& aP, int raw) {
    const double ds2 = std::max(0.0, 1.0 - std::abs(aP));
    // Bucket placement tolerates the float-precision angle; the scan window
    // and the prune slack both dwarf it.
    const double phi = wrap_2pi(-2.0 * static_cast<double>(std::atan2(
                                           static_cast<float>(aP.imag()),
                                           static_cast<float>(aP.real()))));
    int k = static_cast<int>(phi / kSector);
    double phi0 = phi - k * kSector;
    if (phi0 >= kSector) {  // numerical edge at the sector boundary
      phi0 -= kSector;
      ++k;
    }
    const int bucket = std::clamp(
        static_cast<int>(phi0 / kSector * kBuckets), 0, kBuckets - 1);
    Rec& s = atlas_[static_cast<std::size_t>(bucket) * kLenSlots +
                    static_cast<std::size_t>(std::min(raw, kLenSlots - 1))];
    if (ds2 < s.ds2)
      s = {pack_rec(a_idx, b_idx, c_idx, k, table_[a_idx].len,
                    table_[b_idx].len),
           static_cast<float>(ds2), static_cast<float>(phi0)};
  }

  void ensure_atlas() {
    if (atlas_built_) return;
    ensure_table();
    atlas_.assign(static_cast<std::size_t>(kBuckets) * kLenSlots, Rec{});

    // Key rows for the B side: non-diagonal entries sorted by (|alpha| strip,
    // chi), chi = arg beta - arg alpha being invariant under left R_Z factors.
    struct KeyRow {
      float chi;
      float mag;
      std::uint32_t idx;
    };
    std::vector<KeyRow> rows;
    rows.reserve(table_.size());
    for (std::size_t i = 0; i < table_.size(); ++i) {
      const cplx a(table_[i].ar, table_[i].ai), b(table_[i].br, table_[i].bi);
      if (std::abs(b) < 1e-6) continue;  // diagonal; covered by dyadic tails
      rows.push_back({static_cast<float>(wrap_2pi(std::arg(b * std::conj(a)))),
                      static_cast<float>(std::abs(a)),
                      static_cast<std::uint32_t>(i)});
    }
    const int n_strips = static_cast<int>(1.0 / kStrip) + 2;
    auto strip_of = [&](double mag) {
      return std::min(n_strips - 1,
                      std::max(0, static_cast<int>(mag / kStrip)));
    };
    std::sort(rows.begin(), rows.end(), [&](const KeyRow& x, const KeyRow& y) {
      const int sx = strip_of(x.mag), sy = strip_of(y.mag);
      if (sx != sy) return sx < sy;
      if (x.chi != y.chi) return x.chi < y.chi;
      return x.idx < y.idx;
    });
    std::vector<std::size_t> strip_start(static_cast<std::size_t>(n_strips) + 1,
                                         rows.size());
    for (std::size_t i = rows.size(); i-- > 0;)
      strip_start[static_cast<std::size_t>(strip_of(rows[i].mag))] = i;
    for (std::size_t s = static_cast<std::size_t>(n_strips); s-- > 0;)
      if (strip_start[s] == rows.size()) strip_start[s] = strip_start[s + 1];
    std::vector<float> chis(rows.size());  // contiguous keys for the window walk
    for (std::size_t i = 0; i < rows.size(); ++i) chis[i] = rows[i].chi;

    // Per-strip grid over chi so a window lookup starts a few rows from its
    // target instead of bisecting the whole strip.
    constexpr int kChiCells = 128;
    constexpr double kCellW = 2 * kPi / kChiCells;
    std::vector<std::uint32_t> grid(
        static_cast<std::size_t>(n_strips) * kChiCells);
    for (int s = 0; s < n_strips; ++s) {
      std::size_t p = strip_start[static_cast<std::size_t>(s)];
      const std::size_t hi = strip_start[static_cast<std::size_t>(s) + 1];
      for (int cell = 0; cell < kChiCells; ++cell) {
        while (p < hi && chis[p] < cell * kCellW) ++p;
        grid[static_cast<std::size_t>(s) * kChiCells + cell] =
            static_cast<std::uint32_t>(p);
      }
    }

    // Enumerate targets A' = A * C.  A matching B obeys the circle
    // invariants of A'^dag -- same |alpha|, chi offset by pi -- to within a
    // window set by the tube radius, so only a thin key range is probed.
    const std::size_t dict_end =
        len_start_[std::min<std::size_t>(kDictLen + 1, len_start_.size() - 1)];
    const double tube_mag2 = (1.0 - kTube * kTube) * (1.0 - kTube * kTube);
    for (std::size_t c = 0; c < dict_end; ++c) {
      const cplx aC(table_[c].ar, table_[c].ai), bC(table_[c].br, table_[c].bi);
      const int len_c = table_[c].len;
      for (std::size_t a = 0; a < table_.size(); ++a) {
        const cplx aA(table_[a].ar, table_[a].ai);
        const cplx bA(table_[a].br, table_[a].bi);
        const cplx aT = aA * aC - bA * std::conj(bC);
        const cplx bT = aA * bC + bA * std::conj(aC);
        const double m2 = std::norm(aT);
        const int raw_ac = table_[a].len + len_c;
        if (m2 >= tube_mag2)  // A' alone already hugs the circle
          add_candidate(a, 0, c, aT, raw_ac);
        const double m_t = std::sqrt(m2);
        const double b_t = std::sqrt(std::max(0.0, 1.0 - m2));
        if (b_t < 1e-6) continue;  // diagonal target; tails cover it
        const double chi_t = wrap_2pi(kPi + std::arg(aT * bT));
        const double w_chi = std::min(
            kChiCap, 1.03 * kTube * (m_t + b_t) / (m_t * b_t) + 1e-5);
        const int s_lo = strip_of(m_t - kStrip), s_hi = strip_of(m_t + kStrip);
        for (int s = s_lo; s <= s_hi; ++s) {
          const std::size_t r_hi = strip_start[static_cast<std::size_t>(s) + 1];
          for (const double shift : {0.0, 2 * kPi, -2 * kPi}) {
            const double c_lo = chi_t - w_chi + shift;
            const double c_hi = chi_t + w_chi + shift;
            if (c_hi < 0.0 || c_lo > 2 * kPi) continue;
            const int cell = std::clamp(static_cast<int>(c_lo / kCellW), 0,
                                        kChiCells - 1);
            std::size_t it = grid[static_cast<std::size_t>(s) * kChiCells +
                                  static_cast<std::size_t>(cell)];
            while (it < r_hi && chis[it] < c_lo) ++it;
            for (; it < r_hi && chis[it] <= c_hi; ++it) {
              const KeyRow& row = rows[it];
              if (std::abs(row.mag - m_t) > kStrip) continue;
              const Entry& eb = table_[row.idx];
              // alpha of U_B * U_A'
              const cplx aW =
                  cplx(eb.ar, eb.ai) * aT - cplx(eb.br, eb.bi) * std::conj(bT);
              if (std::norm(aW) < tube_mag2) continue;
              add_candidate(a, row.idx, c, aW, raw_ac + eb.len);
            }
          }
        }
      }
    }
    atlas_built_ = true;
  }

  // ---- word reconstruction and verification ----

  // Tokens: -1 for H, j in 1..7 for T^j.  push_token keeps the sequence
  // reduced (no adjacent H pairs, merged T-runs), and composing reduced
  // sequences through it preserves that.
  using Tokens = std::vector<std::int8_t>;

  static void push_token(Tokens& t, std::int8_t tok) {
    if (tok == -1) {
      if (!t.empty() && t.back() == -1) t.pop_back();
      else t.push_back(-1);
      return;
    }
    if (!t.empty() && t.back() != -1) {
      const int j = (t.back() + tok) & 7;
      t.pop_back();
      if (j != 0) t.push_back(static_cast<std::int8_t>(j));
      return;
    }
    t.push_back(tok);
  }

  void append_entry_tokens(std::uint32_t idx, Tokens& out) const {
    std::int8_t rev[kMaxHalf];
    int n = 0;
    for (std::uint32_t i = idx; table_[i].gate != 0; i = table_[i].parent)
      rev[n++] = table_[i].gate == 1 ? -1 : 1;
    while (n-- > 0) push_token(out, rev[n]);
  }

  static std::vector<GateKind> emit(const Tokens& toks) {
    std::vector<GateKind> w;
    for (const std::int8_t tok : toks) {
      if (tok == -1) w.push_back(GateKind::H);
      else for (GateKind g : dyadic_word(tok)) w.push_back(g);
    }
    return w;
  }

  static Mat2 word_unitary(const std::vector<GateKind>& w) {
    Mat2 u = mat2_identity();
    for (GateKind g : w) u = mul(mat2_of(g), u);
    return u;
  }

  static SynthResult finish(const std::vector<GateKind>& word, std::size_t raw,
                            double tn) {
    SynthResult r;
    r.word = word;
    r.dist = phase_dist(word_unitary(word), rz_mat(tn));
    for (GateKind g : word)
      if (g == GateKind::T) ++r.t_count;
    r.search_length = raw ? raw : word.size();
    return r;
  }

  struct Core {
    Tokens tokens;          // reduced C ++ A ++ B, before the dyadic tail
    std::uint16_t raw = 0;  // factor length sum, pre-collapse
    std::uint8_t k = 0;     // sector the core was fit to
  };

  SynthResult rebuild(const Core& core, int k_query, double tn) const {
    Tokens toks = core.tokens;
    const int tail = (k_query - core.k) & 7;
    if (tail) push_token(toks, static_cast<std::int8_t>(tail));
    return finish(emit(toks), core.raw + dyadic_word(tail).size(), tn);
  }

  bool scan(double tn, double phi0, int k, const SynthConfig& cfg,
            SynthResult& out, Core& out_core, double& best_d) {
    const double eps = cfg.epsilon;
    struct Cand {
      std::uint64_t w;     // packed (a, b, c) of the stored candidate
      std::uint16_t raw;
      std::uint8_t k;      // sector after the scan's wraparound shift
      std::size_t total;
      double dest;         // lower estimate of the achievable distance
    };
    std::vector<Cand> cands;

    // Bare dyadic words are always in the running; they cover large epsilon
    // and angles just outside the exactness snap.
    for (int j = 0; j < 8; ++j) {
      const double gap = std::remainder(tn - j * kSector, 2 * kPi);
      cands.push_back({0, 0, static_cast<std::uint8_t>((k - j) & 7),
                       dyadic_word(j).size(), std::abs(std::sin(gap / 2))});
    }

    const double h = std::min(0.35, 2.9 * eps + 1e-4);
    const int span = static_cast<int>(h / kSector * kBuckets) + 1;
    const int b0 = static_cast<int>(phi0 / kSector * kBuckets);
    const int msd = cfg.max_search_depth;
    for (int b = b0 - span; b <= b0 + span; ++b) {
      const int phys = ((b % kBuckets) + kBuckets) % kBuckets;
      const int kshift =
          (b - phys) / kBuckets;  // whole sectors crossed by the scan
      for (int raw = 0; raw < kLenSlots; ++raw) {
        const Rec& rec = atlas_[static_cast<std::size_t>(phys) * kLenSlots +
                                static_cast<std::size_t>(raw)];
        if (rec.ds2 > 1e29f) continue;
        if (msd < kMaxHalf) {
          const int len_a = static_cast<int>(rec.w >> 49 & 0x3f);
          const int len_b = static_cast<int>(rec.w >> 55 & 0x3f);
          if (len_a > msd || len_b > msd) continue;
        }
        // With its tail the candidate best-fits tn at offset dphi; the
        // achievable distance is exactly 1 - (1 - dstar^2) cos(dphi/2) under
        // the square root, so hopeless candidates are skipped pre-verification.
        const double dphi = rec.phi0 + kshift * kSector - phi0;
        const double dest = std::sqrt(std::max(
            0.0, 1.0 - (1.0 - static_cast<double>(rec.ds2)) *
                           std::max(0.0, std::cos(dphi / 2))));
        if (dest > eps + 5e-7) continue;
        const int k_rec = static_cast<int>(rec.w >> 46 & 7);
        const int k_shifted = (k_rec - kshift) & 7;
        const int tail = (k - k_shifted) & 7;
        cands.push_back({rec.w, static_cast<std::uint16_t>(raw),
                         static_cast<std::uint8_t>(k_shifted),
                         raw + dyadic_word(tail).size(), dest});
      }
    }

    std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
      if (x.total != y.total) return x.total < y.total;
      if (x.dest != y.dest) return x.dest < y.dest;
      return x.w < y.w;
    });

    for (const Cand& c : cands) {
      Tokens toks;
      append_entry_tokens(c.w >> 40 & 0x3f, toks);  // temporal order: C, A, B
      append_entry_tokens(c.w & 0xfffff, toks);
      append_entry_tokens(c.w >> 20 & 0xfffff, toks);
      Core core{std::move(toks), c.raw, c.k};
      SynthResult r = rebuild(core, k, tn);
      best_d = std::min(best_d, r.dist);
      if (r.dist <= eps) {
        out = std::move(r);
        out_core = std::move(core);
        return true;
      }
    }
    return false;
  }

  // ---- cache: sector-folded angle (quantized 1e-9) -> core word ----

  struct CacheKey {
    std::int64_t qphi;
    std::uint64_t eps_bits;
    int msd;
    bool operator==(const CacheKey& o) const {
      return qphi == o.qphi && eps_bits == o.eps_bits && msd == o.msd;
    }
  };
  struct CacheKeyHash {
    std::size_t operator()(const CacheKey& key) const {
      std::uint64_t s1 = static_cast<std::uint64_t>(key.qphi);
      std::uint64_t s2 = key.eps_bits + static_cast<std::uint64_t>(key.msd);
      return static_cast<std::size_t>(splitmix64(s1) ^ splitmix64(s2));
    }
  };

  static CacheKey make_key(double phi0, const SynthConfig& cfg) {
    std::uint64_t bits;
    const double e = cfg.epsilon;
    static_assert(sizeof bits == sizeof e);
    std::memcpy(&bits, &e, sizeof bits);
    return {std::llround(phi0 * 1e9), bits, cfg.max_search_depth};
  }

  std::optional<Core> cache_get(double phi0, const SynthConfig& cfg) {
    const auto it = cache_.find(make_key(phi0, cfg));
    if (it == cache_.end()) return std::nullopt;
    lru_.splice(lru_.begin(), lru_, it->second.second);
    return it->second.first;
  }

  void cache_put(double phi0, const SynthConfig& cfg, const Core& core) {
    const CacheKey key = make_key(phi0, cfg);
    const auto it = cache_.find(key);
    if (it != cache_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second.second);
      it->second.first = core;
      return;
    }
    lru_.push_front(key);
    cache_.emplace(key, std::pair(core, lru_.begin()));
    if (cache_.size() > kCacheCap) {
      cache_.erase(lru_.back());
      lru_.pop_back();
    }
  }

  static constexpr std::size_t kCacheCap = 65536;

  std::mutex mu_;
  std::vector<Entry> table_;
  std::unordered_map<std::uint64_t, std::uint32_t> seen_;
  std::vector<std::size_t> len_start_;
  int built_len_ = 0;
  std::vector<Rec> atlas_;
  bool atlas_built_ = false;
  std::unordered_map<CacheKey, std::pair<Core, std::list<CacheKey>::iterator>,
                     CacheKeyHash>
      cache_;
  std::list<CacheKey> lru_;
};

}  // namespace synth_detail

inline SynthResult synthesize_rz(double theta, const SynthConfig& cfg) {
  return synth_detail::Engine::instance().query(theta, cfg);
}

}  // namespace qhe
