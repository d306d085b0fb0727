#include "icsu/embedding.hpp"

#include <cmath>
#include <fstream>
#include <mutex>

#include <nlohmann/json.hpp>

#include "http.hpp"
#include "icsu/error.hpp"
#include "icsu/util.hpp"

namespace icsu {

using nlohmann::json;

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw DataError("embedding vector must have positive dimension");
    for (double v : values_) {
        if (!std::isfinite(v)) throw DataError("embedding vector holds a non-finite value");
    }
}

EmbeddingVector EmbeddingVector::zeros(std::size_t dim) { return EmbeddingVector(std::vector<double>(dim, 0.0)); }

double similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw Error("dimension mismatch: " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        double d = a[i] - b[i];
        sum += d * d;
    }
    return -std::sqrt(sum);
}

std::string_view to_string(EmbedderKind kind) {
    switch (kind) {
        case EmbedderKind::hash_features: return "hash_features";
        case EmbedderKind::precomputed_file: return "precomputed_file";
        case EmbedderKind::remote_service: return "remote_service";
    }
    return "?";
}

EmbedderKind parse_embedder_kind(std::string_view name) {
    if (name == "hash_features" || name == "hash" || name == "hash-features") return EmbedderKind::hash_features;
    if (name == "precomputed_file" || name == "precomputed") return EmbedderKind::precomputed_file;
    if (name == "remote_service" || name == "remote") return EmbedderKind::remote_service;
    throw ConfigError("unknown embedder \"" + std::string(name) + "\" (expected hash, precomputed or remote)");
}

void EmbeddingProviderSpec::validate() const {
    if (dim == 0) throw ConfigError("embedding dim must be positive");
    if (kind == EmbedderKind::remote_service && (!endpoint || endpoint->empty())) {
        throw ConfigError("remote embedder requires an endpoint");
    }
    if (kind == EmbedderKind::precomputed_file && !cache_path) {
        throw ConfigError("precomputed embedder requires a cache path");
    }
    if (max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
}

std::vector<EmbeddingVector> Embedder::embed_batch(std::span<const std::string> texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed(t));
    return out;
}

// ---- hash features ---------------------------------------------------------

HashFeatureEmbedder::HashFeatureEmbedder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
    if (dim == 0) throw ConfigError("embedding dim must be positive");
}

std::string HashFeatureEmbedder::id() const {
    return "hash_features:dim=" + std::to_string(dim_) + ":seed=" + std::to_string(seed_);
}

std::vector<std::string> HashFeatureEmbedder::tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        bool word = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
        if (word) {
            cur.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : ch);
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

EmbeddingVector HashFeatureEmbedder::embed(std::string_view text) {
    std::vector<double> counts(dim_, 0.0);
    for (const auto& tok : tokenize(text)) {
        // FNV-1a, seeded through the offset basis.
        std::uint64_t h = 0xcbf29ce484222325ULL ^ (seed_ * 0x9E3779B97F4A7C15ULL);
        for (char c : tok) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        counts[h % dim_] += 1.0;
    }
    double norm = 0.0;
    for (double v : counts) norm += v * v;
    if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (double& v : counts) v /= norm;
    }
    return EmbeddingVector(std::move(counts));
}

// ---- precomputed file ------------------------------------------------------

namespace {

EmbeddingVector vector_from_json(const json& arr, std::size_t dim, const std::string& where) {
    if (!arr.is_array()) throw DataError(where + ": vector must be a list of numbers");
    std::vector<double> values;
    values.reserve(arr.size());
    for (const auto& x : arr) {
        if (!x.is_number()) throw DataError(where + ": vector must be a list of numbers");
        values.push_back(x.get<double>());
    }
    if (values.size() != dim) {
        throw DataError(where + ": expected dimension " + std::to_string(dim) + ", got " +
                        std::to_string(values.size()));
    }
    return EmbeddingVector(std::move(values));
}

std::unordered_map<std::string, EmbeddingVector> load_precomputed(const std::filesystem::path& path,
                                                                  std::size_t dim) {
    std::unordered_map<std::string, EmbeddingVector> table;
    auto lines = split_lines(read_file(path));
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        std::string where = path.string() + " line " + std::to_string(i + 1);
        json obj;
        try {
            obj = json::parse(lines[i]);
        } catch (const json::parse_error&) {
            throw DataError(where + ": malformed entry");
        }
        if (!obj.is_object() || !obj.contains("digest") || !obj["digest"].is_string() || !obj.contains("vector")) {
            throw DataError(where + ": expected {digest, vector}");
        }
        table.insert_or_assign(obj["digest"].get<std::string>(), vector_from_json(obj["vector"], dim, where));
    }
    return table;
}

}  // namespace

std::string precomputed_entry(std::string_view text, const EmbeddingVector& v) {
    json obj = {{"digest", sha256_hex(text)}, {"vector", std::vector<double>(v.values().begin(), v.values().end())}};
    return obj.dump();
}

PrecomputedEmbedder::PrecomputedEmbedder(const std::filesystem::path& path, std::size_t dim)
    : path_(path), dim_(dim), table_(load_precomputed(path, dim)) {}

std::string PrecomputedEmbedder::id() const {
    return "precomputed_file:" + path_.string() + ":dim=" + std::to_string(dim_);
}

EmbeddingVector PrecomputedEmbedder::embed(std::string_view text) {
    auto digest = sha256_hex(text);
    auto it = table_.find(digest);
    if (it == table_.end()) throw DataError("no precomputed embedding for text digest " + digest);
    return it->second;
}

// ---- remote service --------------------------------------------------------

RemoteEmbedder::RemoteEmbedder(EmbeddingProviderSpec spec) : spec_(std::move(spec)) {
    spec_.kind = EmbedderKind::remote_service;
    spec_.validate();
}

std::string RemoteEmbedder::id() const {
    return "remote_service:" + *spec_.endpoint + ":dim=" + std::to_string(spec_.dim) +
           (spec_.normalize ? ":normalized" : "");
}

EmbeddingVector RemoteEmbedder::embed(std::string_view text) {
    std::string t(text);
    return request(std::span<const std::string>(&t, 1)).front();
}

std::vector<EmbeddingVector> RemoteEmbedder::embed_batch(std::span<const std::string> texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    const std::size_t step = std::max<std::size_t>(spec_.batch_size, 1);
    for (std::size_t i = 0; i < texts.size(); i += step) {
        auto part = request(texts.subspan(i, std::min(step, texts.size() - i)));
        for (auto& v : part) out.push_back(std::move(v));
    }
    return out;
}

std::vector<EmbeddingVector> RemoteEmbedder::request(std::span<const std::string> texts) {
    const std::string body = json{{"texts", std::vector<std::string>(texts.begin(), texts.end())}}.dump();
    auto response = detail::with_retries(spec_.max_attempts, spec_.backoff, [&] {
        auto r = detail::post_json(*spec_.endpoint, body, {}, spec_.timeout);
        if (r.status != 200) {
            throw TransportError("embedding service returned HTTP " + std::to_string(r.status), true);
        }
        return r;
    });

    json parsed;
    try {
        parsed = json::parse(response.body);
    } catch (const json::parse_error&) {
        throw TransportError("embedding service returned malformed JSON", false);
    }
    if (!parsed.is_object() || !parsed.contains("vectors") || !parsed["vectors"].is_array() ||
        parsed["vectors"].size() != texts.size()) {
        throw TransportError("embedding service response must carry one vector per text", false);
    }
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& arr : parsed["vectors"]) {
        auto v = vector_from_json(arr, spec_.dim, "embedding service response");
        if (spec_.normalize) {
            double norm = 0.0;
            for (double x : v.values()) norm += x * x;
            if (norm > 0.0) {
                norm = std::sqrt(norm);
                std::vector<double> scaled(v.values().begin(), v.values().end());
                for (double& x : scaled) x /= norm;
                v = EmbeddingVector(std::move(scaled));
            }
        }
        out.push_back(std::move(v));
    }
    return out;
}

// ---- cache -----------------------------------------------------------------

CachingEmbedder::CachingEmbedder(std::unique_ptr<Embedder> inner, std::optional<std::filesystem::path> path)
    : inner_(std::move(inner)), path_(std::move(path)) {
    if (path_ && std::filesystem::exists(*path_)) {
        const auto prefix = inner_->id() + "|";
        for (auto& [digest, v] : load_precomputed(*path_, inner_->dim())) cache_.emplace(prefix + digest, v);
    }
}

std::optional<EmbeddingVector> CachingEmbedder::lookup(const std::string& key) const {
    std::shared_lock lock(mutex_);
    auto it = cache_.find(key);
    if (it == cache_.end()) return std::nullopt;
    ++hits_;
    return it->second;
}

void CachingEmbedder::store(const std::string& digest, const EmbeddingVector& v) {
    std::unique_lock lock(mutex_);
    auto [it, inserted] = cache_.emplace(inner_->id() + "|" + digest, v);
    if (!inserted) return;
    ++misses_;
    if (path_) {
        std::ofstream out(*path_, std::ios::app | std::ios::binary);
        if (!out) throw IoError("cannot append to embedding cache " + path_->string());
        json obj = {{"digest", digest}, {"vector", std::vector<double>(v.values().begin(), v.values().end())}};
        out << obj.dump() << '\n';
    }
}

EmbeddingVector CachingEmbedder::embed(std::string_view text) {
    auto digest = sha256_hex(text);
    if (auto hit = lookup(inner_->id() + "|" + digest)) return *hit;
    auto v = inner_->embed(text);
    store(digest, v);
    return v;
}

std::vector<EmbeddingVector> CachingEmbedder::embed_batch(std::span<const std::string> texts) {
    std::vector<std::optional<EmbeddingVector>> slots(texts.size());
    std::vector<std::string> missing;
    std::vector<std::size_t> missing_at;
    std::vector<std::string> digests(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        digests[i] = sha256_hex(texts[i]);
        slots[i] = lookup(inner_->id() + "|" + digests[i]);
        if (!slots[i]) {
            missing.push_back(texts[i]);
            missing_at.push_back(i);
        }
    }
    if (!missing.empty()) {
        auto fresh = inner_->embed_batch(missing);
        for (std::size_t j = 0; j < fresh.size(); ++j) {
            store(digests[missing_at[j]], fresh[j]);
            slots[missing_at[j]] = std::move(fresh[j]);
        }
    }
    std::vector<EmbeddingVector> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

std::size_t CachingEmbedder::hits() const { return hits_.load(); }

std::size_t CachingEmbedder::misses() const {
    std::shared_lock lock(mutex_);
    return misses_;
}

std::unique_ptr<Embedder> make_embedder(const EmbeddingProviderSpec& spec) {
    spec.validate();
    switch (spec.kind) {
        case EmbedderKind::hash_features:
            return std::make_unique<HashFeatureEmbedder>(spec.dim);
        case EmbedderKind::precomputed_file:
            return std::make_unique<PrecomputedEmbedder>(*spec.cache_path, spec.dim);
        case EmbedderKind::remote_service:
            return std::make_unique<CachingEmbedder>(std::make_unique<RemoteEmbedder>(spec), spec.cache_path);
    }
    throw ConfigError("unknown embedder kind");
}

}  // namespace icsu
