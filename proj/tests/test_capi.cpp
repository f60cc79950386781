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


#include <gtest/gtest.h>

#include <cstring>
#include <string>

#include "mpip/mpip.h"

namespace {

const char* kTiny = R"(
node A
node B
iface A 10.0.1.1
iface B 10.0.1.2
link 10.0.1.1 10.0.1.2 10 5 0 100
session s 10.0.1.1 10.0.1.2 udp cbr rate_kbps=100 size=500
duration 1000
)";

struct Owned {
  char* s = nullptr;
  ~Owned() { mpip_string_free(s); }
};

TEST(CApi, VersionIsSet) { EXPECT_GT(std::strlen(mpip_version()), 0u); }

TEST(CApi, ParseErrorReportsLine) {
  mpip_scenario* scn = nullptr;
  EXPECT_EQ(mpip_scenario_parse("node A\nbogus 1\n", &scn), MPIP_ERR_PARSE);
  EXPECT_EQ(scn, nullptr);
  EXPECT_NE(std::string(mpip_last_error()).find("line 2"), std::string::npos);
}

TEST(CApi, NullArgumentsRejected) {
  mpip_scenario* scn = nullptr;
  EXPECT_EQ(mpip_scenario_parse(nullptr, &scn), MPIP_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(mpip_scenario_parse(kTiny, nullptr), MPIP_ERR_INVALID_ARGUMENT);
  mpip_run* run = nullptr;
  EXPECT_EQ(mpip_run_scenario(nullptr, 0, 0, &run), MPIP_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(mpip_cm_decode(nullptr, 25, nullptr), MPIP_ERR_INVALID_ARGUMENT);
  mpip_scenario_free(nullptr);
  mpip_run_free(nullptr);
  mpip_string_free(nullptr);
}

TEST(CApi, MissingFileAndUnknownCanned) {
  mpip_scenario* scn = nullptr;
  EXPECT_EQ(mpip_scenario_load_file("/nonexistent/x.scn", &scn), MPIP_ERR_IO);
  EXPECT_EQ(mpip_scenario_load_canned("no_such_scenario", &scn), MPIP_ERR_NOT_FOUND);
}

TEST(CApi, CannedListing) {
  ASSERT_EQ(mpip_canned_count(), 8u);
  for (size_t i = 0; i < mpip_canned_count(); ++i) {
    mpip_scenario* scn = nullptr;
    ASSERT_EQ(mpip_scenario_load_canned(mpip_canned_name(i), &scn), MPIP_OK);
    mpip_scenario_free(scn);
  }
  EXPECT_EQ(mpip_canned_name(mpip_canned_count()), nullptr);
}

TEST(CApi, RunProducesCsvAndSummary) {
  mpip_scenario* scn = nullptr;
  ASSERT_EQ(mpip_scenario_parse(kTiny, &scn), MPIP_OK);
  mpip_run* run = nullptr;
  ASSERT_EQ(mpip_run_scenario(scn, 1, 7, &run), MPIP_OK);
  Owned m, e, j;
  ASSERT_EQ(mpip_run_metrics_csv(run, &m.s), MPIP_OK);
  ASSERT_EQ(mpip_run_events_csv(run, &e.s), MPIP_OK);
  ASSERT_EQ(mpip_run_summary(run, &j.s), MPIP_OK);
  EXPECT_EQ(std::string(m.s).rfind("time_ms,session_id,", 0), 0u);
  EXPECT_EQ(std::string(e.s).rfind("time_ms,event,detail", 0), 0u);
  const std::string summary = j.s;
  EXPECT_NE(summary.find("\"seed\": 7"), std::string::npos) << summary;
  EXPECT_NE(summary.find("\"delivered_bytes\""), std::string::npos);
  EXPECT_EQ(mpip_run_write_csv(run, "/dev/null/sub"), MPIP_ERR_IO);
  mpip_run_free(run);
  mpip_scenario_free(scn);
}

TEST(CApi, CmRoundTripAndCorruption) {
  mpip_cm cm{};
  cm.version = 1;
  cm.flags = 0x04;
  cm.node_id = 0x0123456789ABull;
  cm.session_id = 77;
  cm.path_id = 3;
  cm.feedback_path_id = 2;
  cm.timestamp_ms = 123456;
  cm.path_delay_ms = -5;
  cm.addr_count = 1;
  cm.addr_slot = 0x0A000101;
  uint8_t buf[MPIP_CM_SIZE];
  ASSERT_EQ(mpip_cm_encode(&cm, buf), MPIP_OK);
  mpip_cm back{};
  ASSERT_EQ(mpip_cm_decode(buf, sizeof buf, &back), MPIP_OK);
  EXPECT_EQ(back.version, cm.version);
  EXPECT_EQ(back.flags, cm.flags);
  EXPECT_EQ(back.node_id, cm.node_id);
  EXPECT_EQ(back.session_id, cm.session_id);
  EXPECT_EQ(back.path_id, cm.path_id);
  EXPECT_EQ(back.feedback_path_id, cm.feedback_path_id);
  EXPECT_EQ(back.timestamp_ms, cm.timestamp_ms);
  EXPECT_EQ(back.path_delay_ms, cm.path_delay_ms);
  EXPECT_EQ(back.addr_count, cm.addr_count);
  EXPECT_EQ(back.addr_slot, cm.addr_slot);

  buf[5] ^= 0x10;
  EXPECT_EQ(mpip_cm_decode(buf, sizeof buf, &back), MPIP_ERR_CODEC);
  EXPECT_EQ(mpip_cm_decode(buf, 24, &back), MPIP_ERR_CODEC);

  cm.node_id = 1ull << 48;
  EXPECT_EQ(mpip_cm_encode(&cm, buf), MPIP_ERR_CODEC);
}

}  // namespace
