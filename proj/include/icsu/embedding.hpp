#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace icsu {

/// Fixed-dimension real vector; every component is finite.
class EmbeddingVector {
public:
    EmbeddingVector() = default;
    /// Throws DataError when `values` is empty or holds a non-finite number.
    explicit EmbeddingVector(std::vector<double> values);
    static EmbeddingVector zeros(std::size_t dim);

    std::size_t dim() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    bool operator==(const EmbeddingVector&) const = default;

private:
    std::vector<double> values_;
};

/// Negative Euclidean similarity, -||a - b||. Zero is the maximum, attained iff a == b.
/// Throws Error on dimension mismatch.
double similarity(const EmbeddingVector& a, const EmbeddingVector& b);

enum class EmbedderKind { hash_features, precomputed_file, remote_service };

std::string_view to_string(EmbedderKind kind);
/// Accepts "hash_features"/"hash", "precomputed_file"/"precomputed", "remote_service"/"remote".
EmbedderKind parse_embedder_kind(std::string_view name);

struct EmbeddingProviderSpec {
    EmbedderKind kind = EmbedderKind::hash_features;
    std::size_t dim = 512;
    std::optional<std::string> endpoint;             // remote_service
    std::optional<std::filesystem::path> cache_path;  // precomputed_file source; write-through cache for remote
    bool normalize = false;                           // L2-normalize remote vectors
    int max_attempts = 3;
    std::chrono::milliseconds backoff{200};
    std::chrono::milliseconds timeout{30000};
    std::size_t batch_size = 64;

    /// Throws ConfigError when a kind-specific requirement is missing.
    void validate() const;
};

/// A text-to-vector provider. Implementations tolerate concurrent calls.
class Embedder {
public:
    virtual ~Embedder() = default;

    virtual std::size_t dim() const = 0;
    /// Stable identifier of the provider and its parameters; used as a cache key.
    virtual std::string id() const = 0;
    virtual EmbeddingVector embed(std::string_view text) = 0;
    /// Order-preserving batch form. The default loops over embed().
    virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts);
};

/// Offline provider: lowercase, split on non-alphanumerics, hash every token
/// into one of `dim` buckets with a fixed seed, count, then scale to unit L2
/// norm. The empty token multiset maps to the zero vector.
class HashFeatureEmbedder final : public Embedder {
public:
    static constexpr std::uint64_t kDefaultSeed = 0x1C5D'0E6A'5EEDULL;

    explicit HashFeatureEmbedder(std::size_t dim, std::uint64_t seed = kDefaultSeed);

    std::size_t dim() const override { return dim_; }
    std::string id() const override;
    EmbeddingVector embed(std::string_view text) override;

    /// The documented tokenizer. Bytes >= 0x80 count as alphanumeric so UTF-8
    /// words stay whole.
    static std::vector<std::string> tokenize(std::string_view text);

private:
    std::size_t dim_;
    std::uint64_t seed_;
};

/// Looks vectors up by the SHA-256 digest of the text. File format: one JSON
/// object per line, {"digest": hex, "vector": [numbers]}.
class PrecomputedEmbedder final : public Embedder {
public:
    PrecomputedEmbedder(const std::filesystem::path& path, std::size_t dim);

    std::size_t dim() const override { return dim_; }
    std::string id() const override;
    /// Throws DataError naming the digest on a miss.
    EmbeddingVector embed(std::string_view text) override;

    std::size_t size() const { return table_.size(); }

private:
    std::filesystem::path path_;
    std::size_t dim_;
    std::unordered_map<std::string, EmbeddingVector> table_;
};

/// HTTP provider: POST {"texts": [...]} -> {"vectors": [[...], ...]}.
/// Non-200 responses and connection failures are retried with exponential
/// backoff up to `max_attempts`.
class RemoteEmbedder final : public Embedder {
public:
    explicit RemoteEmbedder(EmbeddingProviderSpec spec);

    std::size_t dim() const override { return spec_.dim; }
    std::string id() const override;
    EmbeddingVector embed(std::string_view text) override;
    std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override;

private:
    std::vector<EmbeddingVector> request(std::span<const std::string> texts);

    EmbeddingProviderSpec spec_;
};

/// Write-through cache keyed by (provider id, text digest). When a path is
/// given, existing entries are loaded from it and new ones appended in the
/// precomputed-file format.
class CachingEmbedder final : public Embedder {
public:
    CachingEmbedder(std::unique_ptr<Embedder> inner, std::optional<std::filesystem::path> path = std::nullopt);

    std::size_t dim() const override { return inner_->dim(); }
    std::string id() const override { return inner_->id(); }
    EmbeddingVector embed(std::string_view text) override;
    std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override;

    std::size_t hits() const;
    std::size_t misses() const;

private:
    std::optional<EmbeddingVector> lookup(const std::string& key) const;
    void store(const std::string& digest, const EmbeddingVector& v);

    std::unique_ptr<Embedder> inner_;
    std::optional<std::filesystem::path> path_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, EmbeddingVector> cache_;
    mutable std::atomic<std::size_t> hits_{0};
    std::size_t misses_ = 0;
};

std::unique_ptr<Embedder> make_embedder(const EmbeddingProviderSpec& spec);

/// One line of the precomputed-embedding format (without newline).
std::string precomputed_entry(std::string_view text, const EmbeddingVector& v);

}  // namespace icsu
