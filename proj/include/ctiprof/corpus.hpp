#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ctiprof/types.hpp"

namespace ctiprof {

enum class MediaKind { Html, Pdf, OtherText, Binary };

const char* to_string(MediaKind k);
std::optional<MediaKind> media_kind_from_string(const std::string& s);

struct FetchStatus {
  enum class Kind { Ok, HttpError, NetworkError, UnsupportedType };
  Kind kind = Kind::NetworkError;
  int http_code = 0;

  bool ok() const { return kind == Kind::Ok || kind == Kind::UnsupportedType; }
};

std::string to_string(const FetchStatus& s);

/// Content-Type header first, magic bytes second, URL extension last.
MediaKind detect_media_kind(const std::string& content_type,
                            std::string_view body, const std::string& url);

/// One cached fetch outcome. Raw bytes live in the blob store; the sidecar
/// holds everything needed to reproduce results offline.
struct CacheEntry {
  std::string url;
  std::string fqdn;
  FetchStatus status;
  std::string sha256;  // empty unless bytes were stored
  std::string content_type;
  MediaKind media_kind = MediaKind::Binary;
  std::string fetched_at;
};

/// Content-addressed report cache:
///   <dir>/blobs/<first 2 hex>/<sha256>   raw bytes, deduplicated
///   <dir>/meta/<sha256(url)>.json        per-URL sidecar
/// Writes go through a temp file and rename, so a crashed run never leaves a
/// torn entry.
class CorpusCache {
 public:
  explicit CorpusCache(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }

  std::optional<CacheEntry> lookup(const std::string& url) const;
  /// Stores bytes (if status carries any) and the sidecar atomically.
  /// Returns the entry as written.
  CacheEntry store(const std::string& url, FetchStatus status,
                   const std::string& content_type, std::string_view body,
                   const std::string& fetched_at);
  std::optional<std::string> read_blob(const std::string& sha256) const;
  /// Every sidecar in the cache, sorted by URL.
  std::vector<CacheEntry> entries() const;

 private:
  std::filesystem::path dir_;
};

struct ReportDocument {
  ReportRef ref;
  std::string fetched_at;
  FetchStatus status;
  std::string content_sha256;
  MediaKind media_kind = MediaKind::Binary;
  std::string text;
  std::string text_diagnostic;
};

struct FetchOptions {
  int concurrency = 4;
  double rate_per_host = 1.0;  // requests per second per host
  int timeout_seconds = 30;
  int max_redirects = 3;
  bool offline = false;
  std::string user_agent = "ctiprof/0.1 (report corpus fetcher)";
};

struct CorpusSummary {
  std::size_t refs_total = 0;
  std::size_t urls_unique = 0;
  std::size_t fetched = 0;         // network fetches performed this run
  std::size_t reused_cached = 0;   // already-Ok entries skipped
  std::size_t ok = 0;
  std::size_t http_errors = 0;
  std::size_t network_errors = 0;
  std::size_t missing_offline = 0;
  std::set<std::string> unique_hashes;
  std::map<Source, std::set<std::string>> hashes_by_source;

  std::size_t errors() const { return http_errors + network_errors + missing_offline; }
  double error_rate() const {
    return urls_unique == 0 ? 0.0
                            : static_cast<double>(errors()) / static_cast<double>(urls_unique);
  }
};

/// Fetches every ref into the cache (or reuses it), bounded by
/// options.concurrency total workers and options.rate_per_host per-host
/// request rate. Per-URL failures are recorded, never abort the batch.
/// With offline=true nothing touches the network; cache misses count as
/// missing_offline.
CorpusSummary fetch_corpus(const std::vector<ReportRef>& refs, CorpusCache& cache,
                           const FetchOptions& options);

/// Rebuilds a document from the cache, re-extracting text from the stored
/// bytes. Returns nullopt if the URL has no cache entry.
std::optional<ReportDocument> load_document(const CorpusCache& cache,
                                            const ReportRef& ref);

/// HTML -> visible text, PDF -> concatenated page text, OtherText -> lossy
/// UTF-8, Binary -> empty text plus a diagnostic.
std::string extract_text(std::string_view bytes, MediaKind kind,
                         std::string* diagnostic = nullptr);

}  // namespace ctiprof
