// Copyright 2026 The ltr Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ltr/serialization.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ltr/errors.h"

namespace ltr {

using nlohmann::json;

std::string double_to_hex(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%a", value);
  return buf;
}

double hex_to_double(const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw ParseError("not a hex float: '" + text + "'", 0);
  }
  return v;
}

namespace {

json doubles_to_json(std::span<const double> values) {
  json out = json::array();
  for (double v : values) out.push_back(double_to_hex(v));
  return out;
}

std::vector<double> doubles_from_json(const json& j) {
  std::vector<double> out;
  out.reserve(j.size());
  for (const json& v : j) out.push_back(hex_to_double(v.get<std::string>()));
  return out;
}

json shape_to_json(const RankerShape& s) {
  return {{"F", s.listing_width},
          {"Q", s.query_width},
          {"K", s.feature_width},
          {"E", s.embedding_width},
          {"hidden", s.hidden},
          {"feature_hidden", s.feature_hidden},
          {"activation", to_string(s.activation)}};
}

RankerShape shape_from_json(const json& j) {
  RankerShape s;
  s.listing_width = j.at("F").get<int>();
  s.query_width = j.at("Q").get<int>();
  s.feature_width = j.at("K").get<int>();
  s.embedding_width = j.at("E").get<int>();
  s.hidden = j.at("hidden").get<std::vector<int>>();
  s.feature_hidden = j.at("feature_hidden").get<std::vector<int>>();
  s.activation = activation_from_string(j.at("activation").get<std::string>());
  return s;
}

void write_text(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text << '\n';
  if (!out) throw IoError("failed writing '" + path + "'");
}

json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::exception& e) {
    throw ParseError("'" + path + "': " + e.what(), 0);
  }
}

void check_header(const json& j, const std::string& format) {
  if (j.at("format").get<std::string>() != format) {
    throw ParseError("expected a '" + format + "' document", 0);
  }
  const int version = j.at("version").get<int>();
  if (version != kModelFormatVersion) {
    throw ParseError("unsupported " + format + " version " + std::to_string(version), 0);
  }
}

}  // namespace

json net_to_json(const FeedForwardNet& net) {
  const NetConfig& c = net.config();
  return {{"format", "ltr-net"},
          {"version", kModelFormatVersion},
          {"config",
           {{"layer_widths", c.layer_widths},
            {"activation", to_string(c.activation)},
            {"init_seed", c.init_seed}}},
          {"parameters", doubles_to_json(net.parameters())}};
}

FeedForwardNet net_from_json(const json& j) {
  try {
    check_header(j, "ltr-net");
    NetConfig c;
    const json& cj = j.at("config");
    c.layer_widths = cj.at("layer_widths").get<std::vector<int>>();
    c.activation = activation_from_string(cj.at("activation").get<std::string>());
    c.init_seed = cj.at("init_seed").get<std::uint64_t>();
    return FeedForwardNet::from_parameters(std::move(c),
                                           doubles_from_json(j.at("parameters")));
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed net: ") + e.what(), 0);
  } catch (const ConfigError& e) {
    throw ParseError(std::string("malformed net: ") + e.what(), 0);
  } catch (const ShapeError& e) {
    throw ParseError(std::string("malformed net: ") + e.what(), 0);
  }
}

json ranker_to_json(const RankerVariant& ranker) {
  ranker.validate();
  json nets = json::object();
  json vectors = json::object();
  bool residual = true;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PairwiseRanker>) {
          nets["f"] = net_to_json(m.f);
        } else if constexpr (std::is_same_v<T, TruePairwiseRanker>) {
          nets["h"] = net_to_json(m.h);
        } else if constexpr (std::is_same_v<T, AllPairwiseRanker>) {
          nets["f"] = net_to_json(m.base_f.f);
          nets["phi_sup"] = net_to_json(m.phi_sup);
          nets["psi_embed"] = net_to_json(m.psi_embed);
          nets["phi_sim"] = net_to_json(m.phi_sim);
          nets["apln"] = net_to_json(m.apln);
          vectors["beta_sup"] = doubles_to_json(m.beta_sup);
          vectors["beta_sim"] = doubles_to_json(m.beta_sim);
          residual = m.residual;
        } else {
          nets["f"] = net_to_json(m.base_f.f);
          nets["embed"] = net_to_json(m.embed);
          nets["query_proj"] = net_to_json(m.query_proj);
          nets["key_proj"] = net_to_json(m.key_proj);
          nets["value_proj"] = net_to_json(m.value_proj);
          nets["apln"] = net_to_json(m.apln);
          residual = m.residual;
        }
      },
      ranker.model);
  return {{"format", "ltr-ranker"},
          {"version", kModelFormatVersion},
          {"variant", to_string(ranker.kind)},
          {"residual", residual},
          {"widths", shape_to_json(ranker.shape())},
          {"nets", std::move(nets)},
          {"vectors", std::move(vectors)}};
}

RankerVariant ranker_from_json(const json& j) {
  try {
    check_header(j, "ltr-ranker");
    RankerVariant out;
    out.kind = variant_from_string(j.at("variant").get<std::string>());
    const RankerShape shape = shape_from_json(j.at("widths"));
    const bool residual = j.at("residual").get<bool>();
    const json& nets = j.at("nets");
    auto net = [&](const char* name) { return net_from_json(nets.at(name)); };
    switch (out.kind) {
      case VariantKind::kPairwise:
        out.model = PairwiseRanker{shape, net("f")};
        break;
      case VariantKind::kTruePairwiseAvg:
      case VariantKind::kTruePairwiseGbt:
        out.model = TruePairwiseRanker{shape, net("h")};
        break;
      case VariantKind::kAllPairwiseApfn: {
        AllPairwiseRanker r;
        r.base_f = {shape, net("f")};
        r.phi_sup = net("phi_sup");
        r.psi_embed = net("psi_embed");
        r.phi_sim = net("phi_sim");
        r.apln = net("apln");
        r.beta_sup = doubles_from_json(j.at("vectors").at("beta_sup"));
        r.beta_sim = doubles_from_json(j.at("vectors").at("beta_sim"));
        r.residual = residual;
        out.model = std::move(r);
        break;
      }
      case VariantKind::kAllPairwiseAttn: {
        AttentionRanker r;
        r.base_f = {shape, net("f")};
        r.embed = net("embed");
        r.query_proj = net("query_proj");
        r.key_proj = net("key_proj");
        r.value_proj = net("value_proj");
        r.apln = net("apln");
        r.residual = residual;
        out.model = std::move(r);
        break;
      }
    }
    out.validate();
    return out;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed ranker: ") + e.what(), 0);
  } catch (const ConfigError& e) {
    throw ParseError(std::string("malformed ranker: ") + e.what(), 0);
  } catch (const ValidationError& e) {
    throw ParseError(std::string("malformed ranker: ") + e.what(), 0);
  } catch (const ShapeError& e) {
    throw ParseError(std::string("malformed ranker: ") + e.what(), 0);
  }
}

void save_net(const FeedForwardNet& net, const std::string& path) {
  write_text(net_to_json(net).dump(), path);
}

FeedForwardNet load_net(const std::string& path) { return net_from_json(read_json(path)); }

void save_ranker(const RankerVariant& ranker, const std::string& path) {
  write_text(ranker_to_json(ranker).dump(), path);
}

RankerVariant load_ranker(const std::string& path) {
  return ranker_from_json(read_json(path));
}

json ranker_metadata(const RankerVariant& ranker) {
  const json full = ranker_to_json(ranker);
  json nets = json::object();
  for (const auto& [name, net] : full.at("nets").items()) {
    nets[name] = {{"layer_widths", net.at("config").at("layer_widths")},
                  {"activation", net.at("config").at("activation")},
                  {"parameter_count", net.at("parameters").size()}};
  }
  return {{"format", full.at("format")},
          {"version", full.at("version")},
          {"variant", full.at("variant")},
          {"residual", full.at("residual")},
          {"widths", full.at("widths")},
          {"trainable_parameters", ranker.parameter_count()},
          {"nets", std::move(nets)}};
}

}  // namespace ltr
