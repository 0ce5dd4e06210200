#include "jwbinder/harness/scanner_client.hpp"

#include <array>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace jwbinder::harness {

namespace fs = std::filesystem;

namespace {

// Compact SHA-256 (FIPS 180-4), enough for content-addressed caching.
struct Sha256 {
  uint32_t h[8] = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                   0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
  uint64_t length = 0;
  std::array<uint8_t, 64> block{};
  size_t fill = 0;

  static uint32_t rotr(uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

  void compress(const uint8_t* p) {
    static const uint32_t k[64] = {
        0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1,
        0x923f82a4, 0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3,
        0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786,
        0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
        0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147,
        0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13,
        0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
        0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
        0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a,
        0x5b9cca4f, 0x682e6ff3, 0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208,
        0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};
    uint32_t w[64];
    for (int i = 0; i < 16; ++i) {
      w[i] = (uint32_t(p[i * 4]) << 24) | (uint32_t(p[i * 4 + 1]) << 16) |
             (uint32_t(p[i * 4 + 2]) << 8) | uint32_t(p[i * 4 + 3]);
    }
    for (int i = 16; i < 64; ++i) {
      uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
      uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
      w[i] = w[i - 16] + s0 + w[i - 7] + s1;
    }
    uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4], f = h[5], g = h[6], hh = h[7];
    for (int i = 0; i < 64; ++i) {
      uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
      uint32_t ch = (e & f) ^ (~e & g);
      uint32_t t1 = hh + s1 + ch + k[i] + w[i];
      uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
      uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
      uint32_t t2 = s0 + maj;
      hh = g; g = f; f = e; e = d + t1; d = c; c = b; b = a; a = t1 + t2;
    }
    h[0] += a; h[1] += b; h[2] += c; h[3] += d;
    h[4] += e; h[5] += f; h[6] += g; h[7] += hh;
  }

  void update(const uint8_t* data, size_t n) {
    length += n;
    while (n > 0) {
      size_t take = std::min(n, block.size() - fill);
      std::memcpy(block.data() + fill, data, take);
      fill += take;
      data += take;
      n -= take;
      if (fill == block.size()) {
        compress(block.data());
        fill = 0;
      }
    }
  }

  std::string finish() {
    uint64_t bits = length * 8;
    uint8_t pad = 0x80;
    update(&pad, 1);
    uint8_t zero = 0;
    while (fill != 56) update(&zero, 1);
    uint8_t len[8];
    for (int i = 0; i < 8; ++i) len[i] = static_cast<uint8_t>(bits >> (56 - 8 * i));
    update(len, 8);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (uint32_t v : h) {
      for (int shift = 28; shift >= 0; shift -= 4) out += hex[(v >> shift) & 0xF];
    }
    return out;
  }
};

std::string replace_id(std::string path, const std::string& id) {
  size_t at = path.find("{id}");
  if (at != std::string::npos) path.replace(at, 4, id);
  return path;
}

ExternalScanResult parse_engines(const nlohmann::json& doc) {
  ExternalScanResult result;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    result.engines[it.key()] = it.value().get<bool>();
  }
  return result;
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  Sha256 s;
  s.update(reinterpret_cast<const uint8_t*>(bytes.data()), bytes.size());
  return s.finish();
}

ExternalScanResult scan_external(const std::string& file_path, const ScannerConfig& config) {
  ExternalScanResult result;

  std::ifstream in(file_path, std::ios::binary);
  if (!in) {
    result.error = "cannot read " + file_path;
    return result;
  }
  std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::string key = sha256_hex(body);

  fs::path cache_file;
  if (!config.cache_dir.empty()) {
    cache_file = fs::path(config.cache_dir) / (key + ".json");
    std::ifstream cached(cache_file);
    if (cached) {
      try {
        nlohmann::json doc = nlohmann::json::parse(cached);
        result = parse_engines(doc.at("engines"));
        result.from_cache = true;
        return result;
      } catch (...) {
        // unreadable cache entry: fall through to a fresh scan
      }
    }
  }

  if (!config.allow_network) {
    result.error = "network disabled (pass --allow-network)";
    return result;
  }

  httplib::Client client(config.endpoint);
  client.set_connection_timeout(10);
  client.set_read_timeout(30);
  httplib::Headers headers;
  if (!config.api_key_env.empty()) {
    const char* api_key = std::getenv(config.api_key_env.c_str());
    if (api_key) headers.emplace("X-Api-Key", api_key);
  }

  auto submit = client.Post(config.submit_path, headers, body, "application/octet-stream");
  if (!submit) {
    result.error = "network: submit failed";
    return result;
  }
  if (submit->status == 401 || submit->status == 403) {
    result.error = "auth";
    return result;
  }
  if (submit->status != 200) {
    result.error = "scan-error(http " + std::to_string(submit->status) + ")";
    return result;
  }

  std::string id;
  try {
    id = nlohmann::json::parse(submit->body).at("id").get<std::string>();
  } catch (const std::exception& e) {
    result.error = std::string("scan-error(bad submit response: ") + e.what() + ")";
    return result;
  }

  std::string poll_path = replace_id(config.poll_path, id);
  for (int attempt = 0; attempt < config.max_polls; ++attempt) {
    auto poll = client.Get(poll_path, headers);
    if (!poll) {
      result.error = "network: poll failed";
      return result;
    }
    if (poll->status != 200) {
      result.error = "scan-error(http " + std::to_string(poll->status) + ")";
      return result;
    }
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(poll->body);
    } catch (const std::exception& e) {
      result.error = std::string("scan-error(bad poll response: ") + e.what() + ")";
      return result;
    }
    std::string status = doc.value("status", "done");
    if (status == "pending") {
      std::this_thread::sleep_for(std::chrono::milliseconds(config.poll_interval_ms));
      continue;
    }
    result = parse_engines(doc.at("engines"));
    if (!cache_file.empty()) {
      fs::create_directories(config.cache_dir);
      nlohmann::json record;
      record["engines"] = doc.at("engines");
      std::ofstream out(cache_file);
      out << record.dump();
    }
    return result;
  }
  result.error = "scan-error(poll limit reached)";
  return result;
}

}  // namespace jwbinder::harness
