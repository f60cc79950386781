// Copyright 2026 The mpipsim Authors
//
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


#include "mpip/mpip.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include <json.hpp>

#include "mpip/cm.hpp"
#include "mpip/experiment.hpp"
#include "mpip/scenario.hpp"
#include "mpip/sim.hpp"

struct mpip_scenario {
  mpip::Scenario scn;
};

struct mpip_run {
  mpip::RunResult result;
};

namespace {

thread_local std::string g_last_error;

mpip_status fail(mpip_status st, std::string msg) {
  g_last_error = std::move(msg);
  return st;
}

template <class F>
mpip_status guarded(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const mpip::ScenarioError& e) {
    return fail(MPIP_ERR_PARSE, e.what());
  } catch (const mpip::IoError& e) {
    return fail(MPIP_ERR_IO, e.what());
  } catch (const mpip::CmError& e) {
    return fail(MPIP_ERR_CODEC, e.what());
  } catch (const std::bad_alloc&) {
    return fail(MPIP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MPIP_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MPIP_ERR_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

std::string summary_json(const mpip::RunResult& r) {
  using nlohmann::json;
  const double secs = static_cast<double>(r.duration) / mpip::kUsPerSec;
  json j;
  j["duration_ms"] = r.duration / mpip::kUsPerMs;
  j["seed"] = r.seed;
  j["events_executed"] = r.events_executed;
  json flows = json::array();
  for (const auto& f : r.flows) {
    flows.push_back({
        {"name", f.name},
        {"proto", f.proto == mpip::Proto::Tcp ? "tcp" : "udp"},
        {"established", f.established},
        {"delivered_bytes", f.delivered_bytes},
        {"goodput_bps", secs > 0 ? f.delivered_bytes * 8.0 / secs : 0.0},
        {"out_of_order", f.out_of_order},
        {"gap_retransmits", f.gap_retransmits},
        {"timeout_retransmits", f.timeout_retransmits},
        {"packets_sent", f.packets_sent},
    });
  }
  j["flows"] = flows;
  json nodes = json::array();
  for (const auto& n : r.nodes) {
    const auto& s = n.stats;
    nodes.push_back({
        {"name", n.name},
        {"mpip", n.mpip},
        {"plain_sent", s.plain_sent},
        {"cm_sent", s.cm_sent},
        {"queries_sent", s.queries_sent},
        {"probes_sent", s.probes_sent},
        {"heartbeats_sent", s.heartbeats_sent},
        {"handshakes_sent", s.handshakes_sent},
        {"path_resets", s.path_resets},
        {"dedup_discards", s.dedup_discards},
        {"reorder_flushes", s.reorder_flushes},
        {"cm_queries_received", n.cm_queries_received},
        {"cm_data_received", n.cm_data_received},
        {"plain_received", n.plain_received},
    });
  }
  j["nodes"] = nodes;
  json drops = json::object();
  for (const auto& [k, v] : r.counters.dropped) drops[k] = v;
  j["network"] = {{"injected", r.counters.injected},
                  {"delivered", r.counters.delivered},
                  {"in_flight", r.counters.in_flight},
                  {"dropped", drops}};
  return j.dump(2);
}

}  // namespace

extern "C" {

const char* mpip_version(void) { return "0.1.0"; }

const char* mpip_last_error(void) { return g_last_error.c_str(); }

mpip_status mpip_scenario_parse(const char* text, mpip_scenario** out) {
  if (!text || !out) return fail(MPIP_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new mpip_scenario{mpip::parse_scenario(text)};
    return MPIP_OK;
  });
}

mpip_status mpip_scenario_load_file(const char* path, mpip_scenario** out) {
  if (!path || !out) return fail(MPIP_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  std::ifstream f(path, std::ios::binary);
  if (!f) return fail(MPIP_ERR_IO, std::string("cannot open ") + path);
  std::ostringstream text;
  text << f.rdbuf();
  if (f.bad()) return fail(MPIP_ERR_IO, std::string("cannot read ") + path);
  return guarded([&] {
    *out = new mpip_scenario{mpip::parse_scenario(text.str())};
    return MPIP_OK;
  });
}

mpip_status mpip_scenario_load_canned(const char* name, mpip_scenario** out) {
  if (!name || !out) return fail(MPIP_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto text = mpip::canned_scenario(name);
    if (!text) return fail(MPIP_ERR_NOT_FOUND, std::string("no canned scenario ") + name);
    *out = new mpip_scenario{mpip::parse_scenario(*text)};
    return MPIP_OK;
  });
}

void mpip_scenario_free(mpip_scenario* scn) { delete scn; }

size_t mpip_canned_count(void) { return mpip::canned_scenarios().size(); }

const char* mpip_canned_name(size_t index) {
  const auto& all = mpip::canned_scenarios();
  // Names are literals embedded at build time, so they are NUL-terminated.
  return index < all.size() ? all[index].name.data() : nullptr;
}

mpip_status mpip_run_scenario(const mpip_scenario* scn, int has_seed, uint64_t seed,
                              mpip_run** out) {
  if (!scn || !out) return fail(MPIP_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    std::optional<std::uint64_t> s;
    if (has_seed) s = seed;
    *out = new mpip_run{mpip::run_scenario(scn->scn, s)};
    return MPIP_OK;
  });
}

mpip_status mpip_run_write_csv(const mpip_run* run, const char* dir) {
  if (!run || !dir) return fail(MPIP_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    mpip::write_outputs(run->result, dir);
    return MPIP_OK;
  });
}

mpip_status mpip_run_metrics_csv(const mpip_run* run, char** out) {
  if (!run || !out) return fail(MPIP_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = dup_string(mpip::metrics_csv(run->result));
    return MPIP_OK;
  });
}

mpip_status mpip_run_events_csv(const mpip_run* run, char** out) {
  if (!run || !out) return fail(MPIP_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = dup_string(mpip::events_csv(run->result));
    return MPIP_OK;
  });
}

mpip_status mpip_run_summary(const mpip_run* run, char** out) {
  if (!run || !out) return fail(MPIP_ERR_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = dup_string(summary_json(run->result));
    return MPIP_OK;
  });
}

void mpip_run_free(mpip_run* run) { delete run; }

void mpip_string_free(char* s) { std::free(s); }

mpip_status mpip_cm_encode(const mpip_cm* cm, uint8_t out[MPIP_CM_SIZE]) {
  if (!cm || !out) return fail(MPIP_ERR_INVALID_ARGUMENT, "null argument");
  if (cm->node_id > mpip::NodeId::kMask)
    return fail(MPIP_ERR_CODEC, "node_id does not fit in 48 bits");
  return guarded([&] {
    mpip::ControlMessage m;
    m.version = cm->version;
    m.flags = cm->flags;
    m.source_node_id = mpip::NodeId(cm->node_id);
    m.session_id = cm->session_id;
    m.path_id = cm->path_id;
    m.feedback_path_id = cm->feedback_path_id;
    m.packet_timestamp = cm->timestamp_ms;
    m.path_delay = cm->path_delay_ms;
    m.addr_count = cm->addr_count;
    m.addr_slot = cm->addr_slot;
    const auto bytes = mpip::encode_cm(m);
    std::memcpy(out, bytes.data(), bytes.size());
    return MPIP_OK;
  });
}

mpip_status mpip_cm_decode(const uint8_t* buf, size_t len, mpip_cm* out) {
  if (!buf || !out) return fail(MPIP_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto m = mpip::decode_cm({buf, len});
    out->version = m.version;
    out->flags = m.flags;
    out->node_id = m.source_node_id.value();
    out->session_id = m.session_id;
    out->path_id = m.path_id;
    out->feedback_path_id = m.feedback_path_id;
    out->timestamp_ms = m.packet_timestamp;
    out->path_delay_ms = m.path_delay;
    out->addr_count = m.addr_count;
    out->addr_slot = m.addr_slot;
    return MPIP_OK;
  });
}

}  // extern "C"
