#include "ctiprof/corpus.hpp"

#include <atomic>
#include <cctype>
#include <chrono>
#include <condition_variable>
#include <ctime>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ctiprof/html_text.hpp"
#include "ctiprof/http_fetch.hpp"
#include "ctiprof/pdf_text.hpp"
#include "ctiprof/sha256.hpp"
#include "json.hpp"

namespace ctiprof {

namespace {

using nlohmann::json;

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool contains_ci(const std::string& haystack, const char* needle) {
  return lower(haystack).find(needle) != std::string::npos;
}

std::string now_utc_iso() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool mostly_printable(std::string_view body) {
  std::size_t sample = std::min<std::size_t>(body.size(), 4096);
  if (sample == 0) return false;
  std::size_t printable = 0;
  for (std::size_t i = 0; i < sample; ++i) {
    unsigned char c = static_cast<unsigned char>(body[i]);
    if (c == '\n' || c == '\r' || c == '\t' || (c >= 0x20 && c != 0x7F)) ++printable;
  }
  return printable * 10 >= sample * 9;
}

void atomic_write(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

json status_to_json(const FetchStatus& s) {
  json j;
  switch (s.kind) {
    case FetchStatus::Kind::Ok: j["kind"] = "ok"; break;
    case FetchStatus::Kind::HttpError: j["kind"] = "http_error"; break;
    case FetchStatus::Kind::NetworkError: j["kind"] = "network_error"; break;
    case FetchStatus::Kind::UnsupportedType: j["kind"] = "unsupported_type"; break;
  }
  if (s.http_code != 0) j["http_code"] = s.http_code;
  return j;
}

FetchStatus status_from_json(const json& j) {
  FetchStatus s;
  std::string kind = j.value("kind", "network_error");
  if (kind == "ok") s.kind = FetchStatus::Kind::Ok;
  else if (kind == "http_error") s.kind = FetchStatus::Kind::HttpError;
  else if (kind == "unsupported_type") s.kind = FetchStatus::Kind::UnsupportedType;
  else s.kind = FetchStatus::Kind::NetworkError;
  s.http_code = j.value("http_code", 0);
  return s;
}

// Blocks callers so no host sees more than rate_per_host requests/second.
class HostRateLimiter {
 public:
  explicit HostRateLimiter(double rate_per_host)
      : interval_(rate_per_host > 0 ? 1.0 / rate_per_host : 0.0) {}

  void acquire(const std::string& host) {
    if (interval_ <= 0.0) return;
    std::chrono::steady_clock::time_point wait_until;
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto now = std::chrono::steady_clock::now();
      auto& next = next_slot_[host];
      if (next < now) next = now;
      wait_until = next;
      next += std::chrono::microseconds(static_cast<long long>(interval_ * 1e6));
    }
    std::this_thread::sleep_until(wait_until);
  }

 private:
  double interval_;
  std::mutex mu_;
  std::map<std::string, std::chrono::steady_clock::time_point> next_slot_;
};

}  // namespace

const char* to_string(MediaKind k) {
  switch (k) {
    case MediaKind::Html: return "html";
    case MediaKind::Pdf: return "pdf";
    case MediaKind::OtherText: return "other_text";
    case MediaKind::Binary: return "binary";
  }
  return "?";
}

std::optional<MediaKind> media_kind_from_string(const std::string& s) {
  if (s == "html") return MediaKind::Html;
  if (s == "pdf") return MediaKind::Pdf;
  if (s == "other_text") return MediaKind::OtherText;
  if (s == "binary") return MediaKind::Binary;
  return std::nullopt;
}

std::string to_string(const FetchStatus& s) {
  switch (s.kind) {
    case FetchStatus::Kind::Ok: return "ok";
    case FetchStatus::Kind::HttpError: return "http_error:" + std::to_string(s.http_code);
    case FetchStatus::Kind::NetworkError: return "network_error";
    case FetchStatus::Kind::UnsupportedType: return "unsupported_type";
  }
  return "?";
}

MediaKind detect_media_kind(const std::string& content_type,
                            std::string_view body, const std::string& url) {
  if (!content_type.empty()) {
    if (contains_ci(content_type, "html")) return MediaKind::Html;
    if (contains_ci(content_type, "pdf")) return MediaKind::Pdf;
    if (contains_ci(content_type, "image/") || contains_ci(content_type, "audio/") ||
        contains_ci(content_type, "video/") || contains_ci(content_type, "msword") ||
        contains_ci(content_type, "officedocument") || contains_ci(content_type, "rtf") ||
        contains_ci(content_type, "zip")) {
      return MediaKind::Binary;
    }
    if (contains_ci(content_type, "text/") || contains_ci(content_type, "json") ||
        contains_ci(content_type, "xml")) {
      return MediaKind::OtherText;
    }
  }
  if (body.size() >= 5 && body.substr(0, 5) == "%PDF-") return MediaKind::Pdf;
  std::string head = lower(std::string(body.substr(0, 256)));
  if (head.find("<!doctype html") != std::string::npos ||
      head.find("<html") != std::string::npos) {
    return MediaKind::Html;
  }
  std::string path = lower(url);
  auto query = path.find('?');
  if (query != std::string::npos) path.erase(query);
  if (path.ends_with(".pdf")) return MediaKind::Pdf;
  if (path.ends_with(".html") || path.ends_with(".htm")) return MediaKind::Html;
  if (path.ends_with(".txt")) return MediaKind::OtherText;
  return mostly_printable(body) ? MediaKind::OtherText : MediaKind::Binary;
}

CorpusCache::CorpusCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_ / "blobs");
  std::filesystem::create_directories(dir_ / "meta");
}

std::optional<CacheEntry> CorpusCache::lookup(const std::string& url) const {
  std::filesystem::path meta = dir_ / "meta" / (sha256_hex(url) + ".json");
  std::ifstream in(meta, std::ios::binary);
  if (!in) return std::nullopt;
  json doc;
  try {
    in >> doc;
  } catch (const json::exception&) {
    return std::nullopt;  // torn or corrupt sidecar: treat as absent
  }
  CacheEntry e;
  e.url = doc.value("url", url);
  e.fqdn = doc.value("fqdn", "");
  e.status = status_from_json(doc.value("status", json::object()));
  e.sha256 = doc.value("sha256", "");
  e.content_type = doc.value("content_type", "");
  e.media_kind = media_kind_from_string(doc.value("media_kind", "binary"))
                     .value_or(MediaKind::Binary);
  e.fetched_at = doc.value("fetched_at", "");
  return e;
}

CacheEntry CorpusCache::store(const std::string& url, FetchStatus status,
                              const std::string& content_type,
                              std::string_view body, const std::string& fetched_at) {
  CacheEntry e;
  e.url = url;
  e.fqdn = fqdn_of_url(url);
  e.status = status;
  e.content_type = content_type;
  e.media_kind = detect_media_kind(content_type, body, url);
  e.fetched_at = fetched_at;
  if (status.ok()) {
    e.sha256 = sha256_hex(body);
    std::filesystem::path blob = dir_ / "blobs" / e.sha256.substr(0, 2) / e.sha256;
    if (!std::filesystem::exists(blob)) atomic_write(blob, body);
  }
  json doc;
  doc["url"] = e.url;
  doc["fqdn"] = e.fqdn;
  doc["status"] = status_to_json(e.status);
  if (!e.sha256.empty()) doc["sha256"] = e.sha256;
  doc["content_type"] = e.content_type;
  doc["media_kind"] = to_string(e.media_kind);
  doc["fetched_at"] = e.fetched_at;
  atomic_write(dir_ / "meta" / (sha256_hex(url) + ".json"), doc.dump(2) + "\n");
  return e;
}

std::optional<std::string> CorpusCache::read_blob(const std::string& sha256) const {
  if (sha256.size() < 3) return std::nullopt;
  std::filesystem::path blob = dir_ / "blobs" / sha256.substr(0, 2) / sha256;
  std::ifstream in(blob, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<CacheEntry> CorpusCache::entries() const {
  std::vector<CacheEntry> out;
  std::filesystem::path meta = dir_ / "meta";
  if (!std::filesystem::exists(meta)) return out;
  for (const auto& file : std::filesystem::directory_iterator(meta)) {
    if (file.path().extension() != ".json") continue;
    std::ifstream in(file.path(), std::ios::binary);
    json doc;
    try {
      in >> doc;
    } catch (const json::exception&) {
      continue;
    }
    CacheEntry e;
    e.url = doc.value("url", "");
    e.fqdn = doc.value("fqdn", "");
    e.status = status_from_json(doc.value("status", json::object()));
    e.sha256 = doc.value("sha256", "");
    e.content_type = doc.value("content_type", "");
    e.media_kind = media_kind_from_string(doc.value("media_kind", "binary"))
                       .value_or(MediaKind::Binary);
    e.fetched_at = doc.value("fetched_at", "");
    if (!e.url.empty()) out.push_back(std::move(e));
  }
  std::sort(out.begin(), out.end(),
            [](const CacheEntry& a, const CacheEntry& b) { return a.url < b.url; });
  return out;
}

std::string extract_text(std::string_view bytes, MediaKind kind, std::string* diagnostic) {
  switch (kind) {
    case MediaKind::Html:
      return html_to_text(bytes);
    case MediaKind::Pdf: {
      PdfTextResult r = pdf_to_text(bytes);
      if (diagnostic && !r.diagnostic.empty()) *diagnostic = r.diagnostic;
      return r.text;
    }
    case MediaKind::OtherText: {
      // Lossy UTF-8: keep valid sequences, replace everything else.
      std::string out;
      out.reserve(bytes.size());
      std::size_t i = 0;
      while (i < bytes.size()) {
        unsigned char c = static_cast<unsigned char>(bytes[i]);
        std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3
                                     : (c >> 3) == 0x1E  ? 4 : 0;
        bool valid = len > 0 && i + len <= bytes.size();
        for (std::size_t k = 1; valid && k < len; ++k) {
          valid = (static_cast<unsigned char>(bytes[i + k]) & 0xC0) == 0x80;
        }
        if (valid) {
          out.append(bytes.substr(i, len));
          i += len;
        } else {
          out += "\xEF\xBF\xBD";
          ++i;
        }
      }
      return out;
    }
    case MediaKind::Binary:
      if (diagnostic) *diagnostic = "binary content; text extraction unsupported";
      return {};
  }
  return {};
}

std::optional<ReportDocument> load_document(const CorpusCache& cache,
                                            const ReportRef& ref) {
  auto entry = cache.lookup(ref.url);
  if (!entry) return std::nullopt;
  ReportDocument doc;
  doc.ref = ref;
  doc.fetched_at = entry->fetched_at;
  doc.status = entry->status;
  doc.content_sha256 = entry->sha256;
  doc.media_kind = entry->media_kind;
  if (!entry->sha256.empty()) {
    if (auto bytes = cache.read_blob(entry->sha256)) {
      doc.text = extract_text(*bytes, entry->media_kind, &doc.text_diagnostic);
    } else {
      doc.text_diagnostic = "blob missing from cache";
    }
  }
  return doc;
}

CorpusSummary fetch_corpus(const std::vector<ReportRef>& refs, CorpusCache& cache,
                           const FetchOptions& options) {
  CorpusSummary summary;
  summary.refs_total = refs.size();

  // One fetch per unique URL; a URL referenced by both knowledge bases
  // contributes its hash to both source tallies.
  std::map<std::string, std::set<Source>> sources_of_url;
  for (const auto& ref : refs) sources_of_url[ref.url].insert(ref.source);
  std::vector<const std::pair<const std::string, std::set<Source>>*> work;
  work.reserve(sources_of_url.size());
  for (const auto& item : sources_of_url) work.push_back(&item);
  summary.urls_unique = work.size();

  std::mutex summary_mu;
  auto account = [&](const CacheEntry& entry, const std::set<Source>& sources,
                     bool from_cache) {
    std::lock_guard<std::mutex> lock(summary_mu);
    if (from_cache) summary.reused_cached++;
    else summary.fetched++;
    switch (entry.status.kind) {
      case FetchStatus::Kind::Ok:
      case FetchStatus::Kind::UnsupportedType:
        summary.ok++;
        break;
      case FetchStatus::Kind::HttpError: summary.http_errors++; return;
      case FetchStatus::Kind::NetworkError: summary.network_errors++; return;
    }
    if (!entry.sha256.empty()) {
      summary.unique_hashes.insert(entry.sha256);
      for (Source s : sources) summary.hashes_by_source[s].insert(entry.sha256);
    }
  };

  if (options.offline) {
    for (const auto* item : work) {
      auto entry = cache.lookup(item->first);
      if (!entry) {
        summary.missing_offline++;
        continue;
      }
      account(*entry, item->second, /*from_cache=*/true);
    }
    return summary;
  }

  HostRateLimiter limiter(options.rate_per_host);
  std::atomic<std::size_t> next{0};
  HttpFetchOptions http_opts;
  http_opts.timeout_seconds = options.timeout_seconds;
  http_opts.max_redirects = options.max_redirects;
  http_opts.user_agent = options.user_agent;

  auto worker = [&]() {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= work.size()) return;
      const std::string& url = work[i]->first;
      const std::set<Source>& sources = work[i]->second;

      if (auto cached = cache.lookup(url); cached && cached->status.ok()) {
        account(*cached, sources, /*from_cache=*/true);
        continue;
      }
      limiter.acquire(fqdn_of_url(url));
      HttpResponse res = http_get(url, http_opts);
      FetchStatus status;
      std::string body;
      std::string content_type;
      if (!res.transport_ok) {
        status.kind = FetchStatus::Kind::NetworkError;
      } else if (res.status < 200 || res.status >= 300) {
        status.kind = FetchStatus::Kind::HttpError;
        status.http_code = res.status;
      } else {
        body = std::move(res.body);
        content_type = res.content_type;
        MediaKind media = detect_media_kind(content_type, body, url);
        status.kind = media == MediaKind::Binary ? FetchStatus::Kind::UnsupportedType
                                                 : FetchStatus::Kind::Ok;
        status.http_code = res.status;
      }
      CacheEntry entry;
      {
        // Cache writes race only on distinct URLs; blob writes are idempotent.
        entry = cache.store(url, status, content_type, body, now_utc_iso());
      }
      account(entry, sources, /*from_cache=*/false);
    }
  };

  std::size_t n_threads = std::max(1, options.concurrency);
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return summary;
}

}  // namespace ctiprof
