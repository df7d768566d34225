#pragma once

// JSON documents for chains, seeds and surfaces. Complex numbers are [re, im]
// pairs; doubles are written shortest-round-trip, so parse(dump(x)) == x.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "json.hpp"

#include "dnahm/chain.hpp"
#include "dnahm/evolution.hpp"
#include "dnahm/spectral.hpp"

namespace dnahm::io {

using json = nlohmann::json;

inline constexpr const char* kFormatVersion = "1.0";

inline json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline cplx complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw Error(ErrorCode::ParseError, "complex numbers must be [re, im]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json matrix_to_json(const CMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline CMatrix matrix_from_json(const json& j, std::size_t k, const std::string& what) {
  if (!j.is_array() || j.size() != k) throw Error(ErrorCode::ParseError, what + ": expected " + std::to_string(k) + " rows");
  std::vector<cplx> e;
  e.reserve(k * k);
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != k) {
      throw Error(ErrorCode::ParseError, what + ": expected " + std::to_string(k) + " columns");
    }
    for (const auto& z : row) e.push_back(complex_from_json(z));
  }
  return CMatrix(k, k, std::move(e));
}

struct ChainDocument {
  std::string form;  // "dn", "ba", "seed" or "triple"
  std::size_t k = 0;
  std::optional<DNChain> dn;
  std::optional<BAChain> ba;
  std::optional<Seed> seed;
  std::optional<DNSite> triple;
  std::optional<MetricSequence> metric;
  json metadata = json::object();
};

inline json metric_to_json(const MetricSequence& m) {
  json arr = json::array();
  for (const auto& g : m.g) arr.push_back(matrix_to_json(g));
  return arr;
}

inline MetricSequence metric_from_json(const json& j, std::size_t k) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "metric must be an array of matrices");
  MetricSequence m;
  for (const auto& g : j) m.g.push_back(matrix_from_json(g, k, "metric"));
  return m;
}

inline json to_json(const ChainDocument& doc) {
  json j;
  j["format_version"] = kFormatVersion;
  j["form"] = doc.form;
  j["k"] = doc.k;
  if (doc.form == "dn") {
    json sites = json::array(), links = json::array();
    for (const auto& s : doc.dn->sites) {
      sites.push_back({{"r", s.r}, {"A", matrix_to_json(s.A)}, {"B", matrix_to_json(s.B)}, {"D", matrix_to_json(s.D)}});
    }
    for (const auto& l : doc.dn->links) {
      links.push_back({{"from", l.from}, {"Pplus", matrix_to_json(l.Pplus)}, {"Pminus", matrix_to_json(l.Pminus)}});
    }
    j["sites"] = std::move(sites);
    j["links"] = std::move(links);
  } else if (doc.form == "ba") {
    json betas = json::array(), gammas = json::array();
    for (const auto& b : doc.ba->betas) betas.push_back(matrix_to_json(b));
    for (const auto& g : doc.ba->gammas) gammas.push_back(matrix_to_json(g));
    j["origin"] = doc.ba->origin;
    j["betas"] = std::move(betas);
    j["gammas"] = std::move(gammas);
  } else if (doc.form == "seed") {
    j["gamma"] = matrix_to_json(doc.seed->gamma);
    j["beta"] = matrix_to_json(doc.seed->beta);
  } else if (doc.form == "triple") {
    j["A"] = matrix_to_json(doc.triple->A);
    j["B"] = matrix_to_json(doc.triple->B);
    j["D"] = matrix_to_json(doc.triple->D);
  } else {
    throw Error(ErrorCode::ParseError, "unknown form '" + doc.form + "'");
  }
  if (doc.metric) j["metric"] = metric_to_json(*doc.metric);
  if (!doc.metadata.empty()) j["metadata"] = doc.metadata;
  return j;
}

inline ChainDocument document_from_json(const json& j) {
  try {
    if (!j.is_object()) throw Error(ErrorCode::ParseError, "document must be a JSON object");
    ChainDocument doc;
    if (!j.contains("form") || !j.contains("k")) throw Error(ErrorCode::ParseError, "missing 'form' or 'k'");
    doc.form = j.at("form").get<std::string>();
    const long long k = j.at("k").get<long long>();
    if (k < 1) throw Error(ErrorCode::ParseError, "k must be positive");
    doc.k = static_cast<std::size_t>(k);
    if (doc.form == "dn") {
      DNChain c;
      c.k = doc.k;
      for (const auto& s : j.at("sites")) {
        c.sites.push_back({s.at("r").get<int>(), matrix_from_json(s.at("A"), doc.k, "A"),
                           matrix_from_json(s.at("B"), doc.k, "B"), matrix_from_json(s.at("D"), doc.k, "D")});
      }
      for (const auto& l : j.at("links")) {
        c.links.push_back({l.at("from").get<int>(), matrix_from_json(l.at("Pplus"), doc.k, "Pplus"),
                           matrix_from_json(l.at("Pminus"), doc.k, "Pminus")});
      }
      c.validate();
      doc.dn = std::move(c);
    } else if (doc.form == "ba") {
      BAChain c;
      c.k = doc.k;
      c.origin = j.value("origin", 0);
      for (const auto& b : j.at("betas")) c.betas.push_back(matrix_from_json(b, doc.k, "beta"));
      for (const auto& g : j.at("gammas")) c.gammas.push_back(matrix_from_json(g, doc.k, "gamma"));
      c.validate();
      doc.ba = std::move(c);
    } else if (doc.form == "seed") {
      doc.seed = Seed{matrix_from_json(j.at("gamma"), doc.k, "gamma"), matrix_from_json(j.at("beta"), doc.k, "beta")};
    } else if (doc.form == "triple") {
      doc.triple = DNSite{0, matrix_from_json(j.at("A"), doc.k, "A"), matrix_from_json(j.at("B"), doc.k, "B"),
                          matrix_from_json(j.at("D"), doc.k, "D")};
    } else {
      throw Error(ErrorCode::ParseError, "unknown form '" + doc.form + "'");
    }
    if (j.contains("metric")) doc.metric = metric_from_json(j.at("metric"), doc.k);
    if (j.contains("metadata")) doc.metadata = j.at("metadata");
    return doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

inline ChainDocument make_dn_document(const DNChain& c, std::optional<MetricSequence> metric = std::nullopt) {
  ChainDocument d;
  d.form = "dn";
  d.k = c.k;
  d.dn = c;
  d.metric = std::move(metric);
  return d;
}

inline ChainDocument make_ba_document(const BAChain& c) {
  ChainDocument d;
  d.form = "ba";
  d.k = c.k;
  d.ba = c;
  return d;
}

inline ChainDocument make_seed_document(const Seed& s) {
  ChainDocument d;
  d.form = "seed";
  d.k = s.gamma.rows();
  d.seed = s;
  return d;
}

/// The DN view of any chain-bearing document.
inline DNChain as_dn_chain(const ChainDocument& doc) {
  if (doc.dn) return *doc.dn;
  if (doc.ba) return from_braam_austin(*doc.ba);
  throw Error(ErrorCode::ParseError, "document of form '" + doc.form + "' carries no chain");
}

inline json surface_to_json(const SpectralSurface& s) {
  json rows = json::array();
  for (const auto& row : s.c) {
    json r = json::array();
    for (const auto& z : row) r.push_back(complex_to_json(z));
    rows.push_back(std::move(r));
  }
  return {{"k", s.k}, {"c", std::move(rows)}};
}

inline SpectralSurface surface_from_json(const json& j) {
  try {
    SpectralSurface s;
    s.k = j.at("k").get<std::size_t>();
    for (const auto& row : j.at("c")) {
      std::vector<cplx> r;
      for (const auto& z : row) r.push_back(complex_from_json(z));
      s.c.push_back(std::move(r));
    }
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write '" + path + "'");
  out << text;
}

inline void write_json_file(const std::string& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

inline ChainDocument read_document(const std::string& path) { return document_from_json(read_json_file(path)); }

}  // namespace dnahm::io
