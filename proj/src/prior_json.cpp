#include "hjbd/prior_json.hpp"

#include <json.hpp>

#include "hjbd/error.hpp"

namespace hjbd {

namespace {

using nlohmann::json;

double positive(const json& j, const char* key) {
  if (!j.contains(key)) throw InvalidArgument(std::string("prior: missing field '") + key + "'");
  if (!j[key].is_number()) throw InvalidArgument(std::string("prior: field '") + key + "' must be a number");
  return j[key].get<double>();
}

std::size_t count(const json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) {
    if (fallback == 0) throw InvalidArgument(std::string("prior: missing field '") + key + "'");
    return fallback;
  }
  if (!j[key].is_number_unsigned() || j[key].get<std::size_t>() == 0)
    throw InvalidArgument(std::string("prior: field '") + key + "' must be a positive integer");
  return j[key].get<std::size_t>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw InvalidArgument("prior: unknown field '" + key + "'");
  }
}

}  // namespace

Prior prior_from_json(const std::string& text, std::size_t default_dim) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("prior: invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw InvalidArgument("prior: expected an object with a string field 'kind'");
  const std::string kind = j["kind"].get<std::string>();

  if (kind == "Zero") {
    reject_unknown(j, {"kind", "dim"});
    return Prior::zero(count(j, "dim", default_dim));
  }
  if (kind == "Quadratic") {
    reject_unknown(j, {"kind", "dim", "m"});
    return Prior::quadratic(positive(j, "m"), count(j, "dim", default_dim));
  }
  if (kind == "WeightedL1") {
    reject_unknown(j, {"kind", "dim", "lambda"});
    if (!j.contains("lambda")) throw InvalidArgument("prior: missing field 'lambda'");
    Vec lambda;
    if (j["lambda"].is_number()) {
      lambda.assign(count(j, "dim", default_dim), j["lambda"].get<double>());
    } else if (j["lambda"].is_array()) {
      for (const auto& v : j["lambda"]) {
        if (!v.is_number()) throw InvalidArgument("prior: 'lambda' entries must be numbers");
        lambda.push_back(v.get<double>());
      }
      // A single weight broadcasts over the requested dimension.
      const std::size_t n = j.contains("dim") ? count(j, "dim", 0) : default_dim;
      if (lambda.size() == 1 && n > 1) lambda.assign(n, lambda[0]);
      if (n != 0 && lambda.size() != n) throw InvalidArgument("prior: 'lambda' length does not match dimension");
    } else {
      throw InvalidArgument("prior: 'lambda' must be a number or an array");
    }
    return Prior::weighted_l1(std::move(lambda));
  }
  if (kind == "AnisotropicTV2D") {
    reject_unknown(j, {"kind", "lambda", "width", "height"});
    return Prior::anisotropic_tv(positive(j, "lambda"), count(j, "width", 0), count(j, "height", 0));
  }
  if (kind == "BallIndicator") {
    reject_unknown(j, {"kind", "dim", "radius"});
    return Prior::ball(positive(j, "radius"), count(j, "dim", default_dim));
  }
  throw InvalidArgument("prior: unknown kind '" + kind + "'");
}

std::string prior_to_json(const Prior& prior) {
  json j;
  j["kind"] = prior.name();
  if (prior.is<Prior::Zero>()) {
    j["dim"] = prior.dim();
  } else if (prior.is<Prior::Quadratic>()) {
    j["m"] = prior.as<Prior::Quadratic>().m;
    j["dim"] = prior.dim();
  } else if (prior.is<Prior::WeightedL1>()) {
    j["lambda"] = prior.as<Prior::WeightedL1>().lambda;
  } else if (prior.is<Prior::AnisotropicTV2D>()) {
    const auto& tv = prior.as<Prior::AnisotropicTV2D>();
    j["lambda"] = tv.lambda;
    j["width"] = tv.width;
    j["height"] = tv.height;
  } else {
    j["radius"] = prior.as<Prior::BallIndicator>().radius;
    j["dim"] = prior.dim();
  }
  return j.dump();
}

}  // namespace hjbd
