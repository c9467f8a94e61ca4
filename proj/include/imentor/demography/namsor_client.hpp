#pragma once

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>

#include <httplib.h>
#include <json.hpp>

#include "imentor/core/error.hpp"
#include "imentor/demography/gender.hpp"

namespace imentor {

/// Percent-encodes one URL path segment.
inline std::string encode_path_segment(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char ch : s) {
    if (std::isalnum(ch) || ch == '-' || ch == '_' || ch == '.' || ch == '~') {
      out += static_cast<char>(ch);
    } else {
      out += '%';
      out += kHex[ch >> 4];
      out += kHex[ch & 0xF];
    }
  }
  return out;
}

/// Best-effort ISO 3166 alpha-2 code for a free-text profile location. Only
/// the last comma-separated part is considered.
inline std::optional<std::string> country_code(std::string_view location) {
  static const std::pair<std::string_view, std::string_view> kCountries[] = {
      {"argentina", "AR"}, {"australia", "AU"}, {"austria", "AT"},     {"belgium", "BE"},     {"brazil", "BR"},
      {"canada", "CA"},    {"china", "CN"},     {"czechia", "CZ"},     {"denmark", "DK"},     {"finland", "FI"},
      {"france", "FR"},    {"germany", "DE"},   {"greece", "GR"},      {"hungary", "HU"},     {"india", "IN"},
      {"ireland", "IE"},   {"israel", "IL"},    {"italy", "IT"},       {"japan", "JP"},       {"korea", "KR"},
      {"mexico", "MX"},    {"netherlands", "NL"}, {"new zealand", "NZ"}, {"norway", "NO"},    {"poland", "PL"},
      {"portugal", "PT"},  {"romania", "RO"},   {"russia", "RU"},      {"singapore", "SG"},   {"south korea", "KR"},
      {"spain", "ES"},     {"sweden", "SE"},    {"switzerland", "CH"}, {"taiwan", "TW"},      {"turkey", "TR"},
      {"uk", "GB"},        {"ukraine", "UA"},   {"united kingdom", "GB"}, {"united states", "US"}, {"usa", "US"},
      {"vietnam", "VN"},
  };
  const auto comma = location.rfind(',');
  auto part = comma == std::string_view::npos ? location : location.substr(comma + 1);
  std::string key;
  for (char ch : part) key += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  const auto first = key.find_first_not_of(' ');
  if (first == std::string::npos) return std::nullopt;
  key = key.substr(first, key.find_last_not_of(' ') - first + 1);
  for (const auto& [name, code] : kCountries) {
    if (key == name) return std::string(code);
  }
  return std::nullopt;
}

struct NamsorClientOptions {
  std::string base_url = "https://v2.namsor.com";
  std::string key_env = "NAMSOR_API_KEY";
  std::chrono::seconds timeout{30};
};

/// Adapter for the Namsor v2 full-name gender endpoints. The API key is read
/// from the environment at construction and only sent as a request header.
class NamsorGenderClient final : public GenderClient {
 public:
  explicit NamsorGenderClient(NamsorClientOptions options = {}) : options_(std::move(options)), http_(options_.base_url) {
    const char* key = std::getenv(options_.key_env.c_str());
    if (key == nullptr || *key == '\0') throw ArgumentError(options_.key_env + " is not set");
    key_ = key;
    http_.set_connection_timeout(options_.timeout);
    http_.set_read_timeout(options_.timeout);
  }

  std::string id() const override { return "namsor"; }

  double gender_scale(const NameQuery& query) override {
    std::string path = "/NamSorAPIv2/api2/json/genderFull/" + encode_path_segment(query.name);
    if (auto code = country_code(query.location)) {
      path = "/NamSorAPIv2/api2/json/genderFullGeo/" + encode_path_segment(query.name) + "/" + *code;
    }
    auto res = http_.Get(path, httplib::Headers{{"X-API-KEY", key_}, {"Accept", "application/json"}});
    if (!res) throw ClientError("gender request failed: " + httplib::to_string(res.error()));
    if (res->status != 200) throw ClientError("gender service returned HTTP " + std::to_string(res->status));
    try {
      const auto body = nlohmann::json::parse(res->body);
      return body.at("genderScale").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw ClientError(std::string("unexpected gender response: ") + e.what());
    }
  }

 private:
  NamsorClientOptions options_;
  httplib::Client http_;
  std::string key_;
};

}  // namespace imentor
