#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tries/errors.hpp"
#include "tries/random.hpp"

namespace tries {

/// Finite prefix of an infinite key, most significant bit first.
class Key {
public:
    Key() = default;
    explicit Key(std::vector<bool> bits) : bits_(std::move(bits)) {}

    static Key from_string(std::string_view digits) {
        std::vector<bool> bits;
        bits.reserve(digits.size());
        for (char c : digits) {
            require(c == '0' || c == '1', "key digits must be 0 or 1");
            bits.push_back(c == '1');
        }
        return Key(std::move(bits));
    }

    [[nodiscard]] std::size_t size() const noexcept { return bits_.size(); }
    [[nodiscard]] bool bit(std::size_t i) const { return bits_[i]; }

    [[nodiscard]] std::string to_string() const {
        std::string s;
        s.reserve(bits_.size());
        for (bool b : bits_) s.push_back(b ? '1' : '0');
        return s;
    }

    friend bool operator==(const Key&, const Key&) = default;

private:
    std::vector<bool> bits_;
};

/// Observables of one trie. Depths count edges from the root.
struct ShapeStats {
    std::int64_t n = 0;
    std::int64_t size = 0;    // internal nodes
    std::int64_t kpl = 0;     // sum of external-node depths
    std::int64_t npl = 0;     // sum of internal-node depths
    std::int64_t height = 0;  // max external-node depth

    friend bool operator==(const ShapeStats&, const ShapeStats&) = default;
};

/// Immutable binary trie over a key set. Nodes live in one arena; index 0 is
/// the root when the trie is non-empty.
class Trie {
public:
    static constexpr std::int32_t kNone = -1;

    struct Node {
        bool external = false;
        std::int32_t left = kNone;   // bit 0
        std::int32_t right = kNone;  // bit 1
        std::int32_t key = kNone;    // index into keys(), external nodes only
    };

    Trie() = default;

    [[nodiscard]] bool empty() const noexcept { return nodes_.empty(); }
    [[nodiscard]] const std::vector<Node>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] const std::vector<Key>& keys() const noexcept { return keys_; }
    [[nodiscard]] std::int32_t root() const noexcept { return empty() ? kNone : 0; }

    /// Counts accumulated while the trie was built.
    [[nodiscard]] const ShapeStats& build_stats() const noexcept { return stats_; }

    /// Follow `key` bit by bit from the root; returns the external node reached
    /// or kNone when the walk leaves the trie.
    [[nodiscard]] std::int32_t locate(const Key& key) const {
        std::int32_t at = root();
        std::size_t depth = 0;
        while (at != kNone && !nodes_[at].external) {
            if (depth >= key.size()) return kNone;
            at = key.bit(depth) ? nodes_[at].right : nodes_[at].left;
            ++depth;
        }
        return at;
    }

private:
    friend Trie build_trie(std::vector<Key> keys);

    std::vector<Node> nodes_;
    std::vector<Key> keys_;
    ShapeStats stats_;
};

namespace detail {

struct TrieBuilder {
    std::vector<Trie::Node>& nodes;
    const std::vector<Key>& keys;
    ShapeStats& stats;

    // Builds the subtree for keys idx[lo, hi) that agree on their first
    // `depth` bits; returns the new node index.
    std::int32_t build(std::vector<std::int32_t>& idx, std::size_t lo, std::size_t hi,
                       std::size_t depth) {
        auto self = static_cast<std::int32_t>(nodes.size());
        nodes.emplace_back();
        if (hi - lo == 1) {
            nodes[self].external = true;
            nodes[self].key = idx[lo];
            stats.kpl += static_cast<std::int64_t>(depth);
            stats.height = std::max(stats.height, static_cast<std::int64_t>(depth));
            return self;
        }
        stats.size += 1;
        stats.npl += static_cast<std::int64_t>(depth);
        for (std::size_t i = lo; i < hi; ++i) {
            if (keys[idx[i]].size() <= depth)
                throw Error(ErrorKind::KeyExhausted,
                            "key " + std::to_string(idx[i]) + " exhausted at depth " +
                                std::to_string(depth) + " while still sharing a prefix");
        }
        auto mid_it = std::stable_partition(idx.begin() + lo, idx.begin() + hi,
                                            [&](std::int32_t k) { return !keys[k].bit(depth); });
        auto mid = static_cast<std::size_t>(mid_it - idx.begin());
        if (mid > lo) {
            std::int32_t child = build(idx, lo, mid, depth + 1);
            nodes[self].left = child;
        }
        if (hi > mid) {
            std::int32_t child = build(idx, mid, hi, depth + 1);
            nodes[self].right = child;
        }
        return self;
    }
};

} // namespace detail

/// Builds the trie of `keys`. Throws KeyExhausted when two keys cannot be told
/// apart within their stored prefixes; callers should retry with longer keys.
inline Trie build_trie(std::vector<Key> keys) {
    Trie trie;
    trie.keys_ = std::move(keys);
    trie.stats_.n = static_cast<std::int64_t>(trie.keys_.size());
    if (trie.keys_.empty()) return trie;
    std::vector<std::int32_t> idx(trie.keys_.size());
    std::iota(idx.begin(), idx.end(), 0);
    detail::TrieBuilder builder{trie.nodes_, trie.keys_, trie.stats_};
    builder.build(idx, 0, idx.size(), 0);
    return trie;
}

/// Recomputes the observables by a full traversal, independent of the counts
/// gathered during construction.
inline ShapeStats shape_stats(const Trie& trie) {
    ShapeStats s;
    if (trie.empty()) return s;
    std::vector<std::pair<std::int32_t, std::int64_t>> stack{{trie.root(), 0}};
    while (!stack.empty()) {
        auto [at, depth] = stack.back();
        stack.pop_back();
        const auto& node = trie.nodes()[at];
        if (node.external) {
            s.n += 1;
            s.kpl += depth;
            s.height = std::max(s.height, depth);
            continue;
        }
        s.size += 1;
        s.npl += depth;
        if (node.left != Trie::kNone) stack.emplace_back(node.left, depth + 1);
        if (node.right != Trie::kNone) stack.emplace_back(node.right, depth + 1);
    }
    return s;
}

inline constexpr int kDefaultMaxDepth = 4096;

/// Draws the observables of a random trie on n Bernoulli(p) keys by recursive
/// binomial splitting, never materialising keys. Deterministic in `seed`.
///
/// A two-key subtree is a path of L+1 internal nodes with P(L >= k) = s^k,
/// s = p^2 + q^2, ending in two leaves; it is drawn in one step.
inline ShapeStats sample_shape(std::int64_t n, double p, Engine& eng,
                               int max_depth = kDefaultMaxDepth) {
    require_probability(p);
    require(n >= 0, "n must be non-negative");
    require(max_depth >= 64, "max_depth must be at least 64");
    ShapeStats s;
    s.n = n;
    struct Frame {
        std::int64_t keys;
        std::int64_t depth;
    };
    const BinomialSampler binomial(p, n);
    const double log_same = std::log(p * p + (1.0 - p) * (1.0 - p));
    auto guard = [&](std::int64_t depth) {
        if (depth >= max_depth)
            throw Error(ErrorKind::DepthGuardExceeded,
                        "splitting recursion exceeded depth " + std::to_string(max_depth));
    };
    auto leaf = [&](std::int64_t depth) {
        s.kpl += depth;
        s.height = std::max(s.height, depth);
    };
    std::vector<Frame> stack;
    auto visit = [&](std::int64_t keys, std::int64_t depth) {
        if (keys == 1) {
            leaf(depth);
        } else if (keys == 2) {
            const double u = 1.0 - uniform01(eng);  // in (0, 1]
            const double l = std::floor(std::log(u) / log_same);
            guard(depth + static_cast<std::int64_t>(std::min(l, double(max_depth))));
            const auto len = static_cast<std::int64_t>(l);
            s.size += len + 1;
            s.npl += (len + 1) * depth + len * (len + 1) / 2;
            leaf(depth + len + 1);
            leaf(depth + len + 1);
        } else if (keys > 2) {
            stack.push_back({keys, depth});
        }
    };
    visit(n, 0);
    while (!stack.empty()) {
        const Frame f = stack.back();
        stack.pop_back();
        guard(f.depth);
        s.size += 1;
        s.npl += f.depth;
        const std::int64_t ones = binomial(f.keys, eng);
        visit(ones, f.depth + 1);
        visit(f.keys - ones, f.depth + 1);
    }
    return s;
}

inline ShapeStats sample_shape(std::int64_t n, double p, std::uint64_t seed,
                               int max_depth = kDefaultMaxDepth) {
    Engine eng(stream_seed(seed, 0));
    return sample_shape(n, p, eng, max_depth);
}

inline constexpr std::uint64_t kKeyDomain = 0x6b657973;  // "keys"

/// n independent Bernoulli(p) prefixes (bit 1 with probability p). Bit b of
/// key i is a pure function of (seed, i, b), so a longer prefix_len extends
/// the same keys.
inline std::vector<Key> sample_keys(std::int64_t n, double p, std::uint64_t seed,
                                    std::size_t prefix_len = 64) {
    require_probability(p);
    require(n >= 0, "n must be non-negative");
    std::vector<Key> keys;
    keys.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        const std::uint64_t key_seed = stream_seed(seed, static_cast<std::uint64_t>(i), kKeyDomain);
        std::vector<bool> bits(prefix_len);
        for (std::size_t b = 0; b < prefix_len; ++b) bits[b] = counter_uniform01(key_seed, b) < p;
        keys.emplace_back(std::move(bits));
    }
    return keys;
}

/// Explicit-key route: sample keys, build, measure, doubling the prefix length
/// on KeyExhausted.
inline ShapeStats sample_shape_explicit(std::int64_t n, double p, std::uint64_t seed,
                                        std::size_t prefix_len = 64,
                                        std::size_t max_prefix_len = 1 << 14) {
    for (std::size_t len = prefix_len;; len *= 2) {
        try {
            return shape_stats(build_trie(sample_keys(n, p, seed, len)));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::KeyExhausted || len * 2 > max_prefix_len) throw;
        }
    }
}

} // namespace tries
