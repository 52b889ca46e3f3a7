#pragma once

#include <string>

#include "json.hpp"
#include "lolight/classify.hpp"
#include "lolight/normalform.hpp"

namespace lolight::io {

using json = nlohmann::ordered_json;

// Fourier objects: 1D {"max_freq": M, "coeffs": [[a,b],...]},
// 2D {"max_freq": [M,N], "coeffs": [[a,b],...]} in the canonical mode order
// (j = 0 with k = 0..N, then j = 1..M with k = -N..N).
json to_json(const Fn1& f);
json to_json(const Fn2& f);
Fn1 fn1_from_json(const json& j);
Fn2 fn2_from_json(const json& j);

json to_json(const Theta& t);
Theta theta_from_json(const json& j);

// The normative MetricSpec schema; unknown keys are rejected.
json to_json(const MetricSpec& spec);
MetricSpec spec_from_json(const json& j);

json to_json(const ArithCertificates& certs);
ArithCertificates certs_from_json(const json& j);

json to_json(const NormalFormDio& nf);
json to_json(const NormalFormClosed& nf);
json to_json(const AffMap& map);
json to_json(const ClassReport& rep);

MetricSpec load_spec_file(const std::string& path);

// Deterministic dump: stable key order (insertion order) and %.12e for every
// non-integer number, so identical inputs yield byte-identical reports.
std::string dump_deterministic(const json& j, int indent = 2);

} // namespace lolight::io
