// Copyright 2026 The duet Authors
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

#include "duet/curate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

#include "duet/error.hpp"
#include "duet/metrics.hpp"
#include "duet/wav.hpp"
#include "json.hpp"

namespace duet {

using nlohmann::json;

namespace {

constexpr std::string_view kRecordSchema = "duet.segment/1";

bool contains(const std::vector<std::string>& set, const std::string& value) {
  return std::find(set.begin(), set.end(), value) != set.end();
}

SegmentRecord make_record(std::string id, SegmentLabel label, std::string_view why) {
  SegmentRecord r;
  r.id = std::move(id);
  r.label = label;
  r.provenance = std::string(why);
  return r;
}

SegmentRecord unresolved(std::string id, std::string_view why, std::string message) {
  SegmentRecord r = make_record(std::move(id), SegmentLabel::kUnresolved, why);
  r.error = std::move(message);
  return r;
}

template <class T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

}  // namespace

std::string_view label_name(SegmentLabel label) {
  switch (label) {
    case SegmentLabel::kSpeech: return "speech";
    case SegmentLabel::kNonSpeech: return "non_speech";
    case SegmentLabel::kUnresolved: return "unresolved";
  }
  return "unresolved";
}

SegmentLabel parse_label(std::string_view name) {
  if (name == "speech") return SegmentLabel::kSpeech;
  if (name == "non_speech") return SegmentLabel::kNonSpeech;
  if (name == "unresolved") return SegmentLabel::kUnresolved;
  throw InputError("unknown segment label '" + std::string(name) + "'");
}

SegmentRecord classify_transcripts(std::string id, const TranscriptPair& transcripts,
                                   const CurationRules& rules) {
  if (TokenSeq::from_text(transcripts.primary_text).empty())
    return make_record(std::move(id), SegmentLabel::kNonSpeech, provenance::kNoPrimaryTranscript);

  if (!transcripts.secondary_text || !transcripts.english_prob)
    return unresolved(std::move(id), provenance::kAsrFailure,
                      "secondary transcription or language probability missing");

  const double p_en = *transcripts.english_prob;
  if (!std::isfinite(p_en) || p_en < 0.0 || p_en > 1.0)
    return unresolved(std::move(id), provenance::kAsrFailure,
                      "language probability outside [0, 1]");

  // Reference is the secondary (larger) recognizer; primary is the hypothesis.
  const TokenSeq ref = TokenSeq::from_text(*transcripts.secondary_text);
  const TokenSeq hyp = TokenSeq::from_text(transcripts.primary_text);

  SegmentRecord r;
  r.id = std::move(id);
  r.english_prob = p_en;
  if (!(p_en > rules.min_english_prob)) {
    r.label = SegmentLabel::kNonSpeech;
    r.provenance = std::string(provenance::kLanguageRejected);
    return r;
  }
  if (ref.empty()) {
    // Primary heard words, secondary heard none: every word is an insertion.
    r.label = SegmentLabel::kNonSpeech;
    r.provenance = std::string(provenance::kCrossWerRejected);
    return r;
  }
  r.cross_wer = wer(ref, hyp);
  if (!(*r.cross_wer < rules.max_cross_wer)) {
    r.label = SegmentLabel::kNonSpeech;
    r.provenance = std::string(provenance::kCrossWerRejected);
    return r;
  }
  r.label = SegmentLabel::kSpeech;
  r.provenance = std::string(provenance::kDualAsrAccepted);
  r.text_cont = transcripts.primary_text;
  return r;
}

SegmentRecord classify_segment(const std::string& id, const AudioSegment& audio,
                               AsrClient& asr_primary, AsrClient& asr_secondary,
                               const CurationRules& rules) {
  const AsrRequest request{id, encode_wav(audio)};
  TranscriptPair pair;
  try {
    pair.primary_text = asr_primary.transcribe(request).text;
  } catch (const std::exception& e) {
    return unresolved(id, provenance::kAsrFailure, std::string("primary: ") + e.what());
  }
  // Only candidates reach the second recognizer.
  if (!TokenSeq::from_text(pair.primary_text).empty()) {
    try {
      AsrResponse second = asr_secondary.transcribe(request);
      pair.secondary_text = std::move(second.text);
      pair.english_prob = second.language_prob;
    } catch (const std::exception& e) {
      return unresolved(id, provenance::kAsrFailure, std::string("secondary: ") + e.what());
    }
  }
  return classify_transcripts(id, pair, rules);
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open manifest " + path.string());
  const auto base = path.parent_path();
  std::vector<ManifestEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      ManifestEntry e;
      e.id = j.at("id").get<std::string>();
      e.audio = j.at("audio").get<std::string>();
      if (e.audio.is_relative()) e.audio = base / e.audio;
      e.source = j.value("source", std::string());
      if (j.contains("transcript") && !j["transcript"].is_null())
        e.transcript = j["transcript"].get<std::string>();
      out.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

namespace {

SegmentRecord process_entry(const ManifestEntry& entry, const CurationRules& rules,
                            AsrClient& asr_primary, AsrClient& asr_secondary) {
  if (contains(rules.non_speech_sources, entry.source)) {
    SegmentRecord r = make_record(entry.id, SegmentLabel::kNonSpeech, provenance::kNonSpeechSource);
    r.source = entry.source;
    return r;
  }

  AudioSegment raw;
  try {
    raw = read_wav(entry.audio);
    raw.source = entry.source;
  } catch (const std::exception& e) {
    SegmentRecord r = unresolved(entry.id, provenance::kAudioError, e.what());
    r.source = entry.source;
    return r;
  }
  const double duration = raw.duration_s();

  SegmentRecord r;
  if (entry.transcript && duration < rules.pretranscribed_max_s &&
      !TokenSeq::from_text(*entry.transcript).empty()) {
    r = make_record(entry.id, SegmentLabel::kSpeech, provenance::kPreExistingTranscript);
    r.text_cont = *entry.transcript;
  } else {
    AudioSegment standard;
    try {
      standard = standardize(raw);
    } catch (const std::exception& e) {
      r = unresolved(entry.id, provenance::kAudioError, e.what());
      r.source = entry.source;
      r.duration_s = duration;
      return r;
    }
    if (contains(rules.speech_sources, entry.source)) {
      try {
        const std::string text = asr_primary.transcribe({entry.id, encode_wav(standard)}).text;
        if (TokenSeq::from_text(text).empty()) {
          r = make_record(entry.id, SegmentLabel::kNonSpeech, provenance::kNoPrimaryTranscript);
        } else {
          r = make_record(entry.id, SegmentLabel::kSpeech, provenance::kSpeechSource);
          r.text_cont = text;
        }
      } catch (const std::exception& e) {
        r = unresolved(entry.id, provenance::kAsrFailure, std::string("primary: ") + e.what());
      }
    } else {
      r = classify_segment(entry.id, standard, asr_primary, asr_secondary, rules);
    }
  }
  r.source = entry.source;
  r.duration_s = duration;
  return r;
}

}  // namespace

CurationResult curate(std::span<const ManifestEntry> manifest, const CurationRules& rules,
                      AsrClient& asr_primary, AsrClient& asr_secondary,
                      const CurateOptions& options) {
  CurationResult result;
  result.records.resize(manifest.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < manifest.size(); i = next++) {
      try {
        result.records[i] = process_entry(manifest[i], rules, asr_primary, asr_secondary);
      } catch (const std::exception& e) {
        SegmentRecord r = unresolved(manifest[i].id, provenance::kAsrFailure, e.what());
        r.source = manifest[i].source;
        result.records[i] = std::move(r);
      }
    }
  };
  const int n_workers =
      static_cast<int>(std::clamp<std::size_t>(std::max(options.workers, 1), 1, std::max<std::size_t>(manifest.size(), 1)));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int k = 0; k < n_workers; ++k) pool.emplace_back(worker);
  }

  for (const auto& r : result.records) {
    switch (r.label) {
      case SegmentLabel::kSpeech: ++result.counts.speech; break;
      case SegmentLabel::kNonSpeech: ++result.counts.non_speech; break;
      case SegmentLabel::kUnresolved: ++result.counts.unresolved; break;
    }
    if (r.error) result.errors.push_back({r.id, *r.error});
  }
  return result;
}

std::string record_to_json_line(const SegmentRecord& r) {
  json j;
  j["schema"] = kRecordSchema;
  j["id"] = r.id;
  j["source"] = r.source;
  j["label"] = label_name(r.label);
  j["text_cont"] = r.text_cont ? json(*r.text_cont) : json(nullptr);
  j["provenance"] = r.provenance;
  j["duration_s"] = r.duration_s;
  put_optional(j, "english_prob", r.english_prob);
  put_optional(j, "cross_wer", r.cross_wer);
  if (r.mix) j["mix"] = {{"noise_id", r.mix->noise_id}, {"snr_db", r.mix->snr_db}};
  put_optional(j, "error", r.error);
  return j.dump();
}

SegmentRecord record_from_json_line(const std::string& line) {
  try {
    const json j = json::parse(line);
    if (j.value("schema", std::string()) != kRecordSchema)
      throw InputError("unsupported segment record schema");
    SegmentRecord r;
    r.id = j.at("id").get<std::string>();
    r.source = j.value("source", std::string());
    r.label = parse_label(j.at("label").get<std::string>());
    if (j.contains("text_cont") && !j["text_cont"].is_null())
      r.text_cont = j["text_cont"].get<std::string>();
    r.provenance = j.value("provenance", std::string());
    r.duration_s = j.value("duration_s", 0.0);
    if (j.contains("english_prob")) r.english_prob = j["english_prob"].get<double>();
    if (j.contains("cross_wer")) r.cross_wer = j["cross_wer"].get<double>();
    if (j.contains("mix"))
      r.mix = MixInfo{j["mix"].at("noise_id").get<std::string>(), j["mix"].at("snr_db").get<double>()};
    if (j.contains("error")) r.error = j["error"].get<std::string>();
    return r;
  } catch (const json::exception& ex) {
    throw InputError(std::string("malformed segment record: ") + ex.what());
  }
}

void write_records(const std::filesystem::path& path, std::span<const SegmentRecord> records) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  for (const auto& r : records) out << record_to_json_line(r) << '\n';
}

std::string curation_summary_json(const CurationResult& result) {
  json errors = json::array();
  for (const auto& e : result.errors) errors.push_back({{"id", e.id}, {"message", e.message}});
  const json j = {
      {"counts",
       {{"speech", result.counts.speech},
        {"non_speech", result.counts.non_speech},
        {"unresolved", result.counts.unresolved},
        {"total", result.records.size()}}},
      {"errors", errors}};
  return j.dump(2);
}

}  // namespace duet
