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

#ifndef DUET_CURATE_HPP_
#define DUET_CURATE_HPP_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "duet/asr.hpp"
#include "duet/audio.hpp"

namespace duet {

enum class SegmentLabel { kSpeech, kNonSpeech, kUnresolved };

std::string_view label_name(SegmentLabel label);
SegmentLabel parse_label(std::string_view name);

/// Which rule decided a record's label.
namespace provenance {
inline constexpr std::string_view kPreExistingTranscript = "pre_existing_transcript";
inline constexpr std::string_view kSpeechSource = "speech_source";
inline constexpr std::string_view kNonSpeechSource = "non_speech_source";
inline constexpr std::string_view kNoPrimaryTranscript = "no_primary_transcript";
inline constexpr std::string_view kLanguageRejected = "language_prob_rejected";
inline constexpr std::string_view kCrossWerRejected = "cross_wer_rejected";
inline constexpr std::string_view kDualAsrAccepted = "dual_asr_accepted";
inline constexpr std::string_view kAsrFailure = "asr_failure";
inline constexpr std::string_view kAudioError = "audio_error";
}  // namespace provenance

struct CurationRules {
  /// Accept only if P(English) is strictly greater than this.
  double min_english_prob = 0.5;
  /// Accept only if the cross-recognizer WER is strictly less than this.
  double max_cross_wer = 0.5;
  /// Provided transcripts are used for clips strictly shorter than this.
  double pretranscribed_max_s = 10.0;
  /// Sources known to contain speech skip the language/cross-WER gate and
  /// take the primary transcript; sources known to be speech-free are
  /// labelled without recognition. Both are empty by default.
  std::vector<std::string> speech_sources;
  std::vector<std::string> non_speech_sources;
};

/// Outputs of the two recognizers for one segment. The secondary text and
/// language probability are absent when the secondary pass did not run.
struct TranscriptPair {
  std::string primary_text;
  std::optional<std::string> secondary_text;
  std::optional<double> english_prob;
};

struct SegmentRecord {
  static constexpr int kSchemaVersion = 1;

  std::string id;
  std::string source;
  SegmentLabel label = SegmentLabel::kUnresolved;
  std::optional<std::string> text_cont;
  std::string provenance;
  double duration_s = 0.0;
  std::optional<double> english_prob;
  std::optional<double> cross_wer;
  std::optional<MixInfo> mix;
  std::optional<std::string> error;
};

/// The dual-recognizer rule as a pure function of recorded outputs:
/// an empty primary transcript is non-speech; otherwise the segment is
/// speech iff english_prob > min_english_prob and
/// wer(secondary, primary) < max_cross_wer, with text_cont = primary text.
/// A missing secondary pass leaves the record unresolved.
SegmentRecord classify_transcripts(std::string id, const TranscriptPair& transcripts,
                                   const CurationRules& rules);

/// Runs the primary recognizer, and the secondary one for speech
/// candidates, on a standardized segment. Recognizer failures give an
/// unresolved record carrying the error; nothing is dropped.
SegmentRecord classify_segment(const std::string& id, const AudioSegment& audio,
                               AsrClient& asr_primary, AsrClient& asr_secondary,
                               const CurationRules& rules);

struct ManifestEntry {
  std::string id;
  std::filesystem::path audio;
  std::string source;
  std::optional<std::string> transcript;
};

/// Reads a JSONL manifest: {"id", "audio", "source", "transcript"?}. Relative
/// audio paths are resolved against the manifest's directory.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

struct CurationCounts {
  std::size_t speech = 0;
  std::size_t non_speech = 0;
  std::size_t unresolved = 0;
};

struct CurationError {
  std::string id;
  std::string message;
};

struct CurationResult {
  std::vector<SegmentRecord> records;  // input order
  CurationCounts counts;
  std::vector<CurationError> errors;
};

struct CurateOptions {
  /// Records processed concurrently; bounds in-flight recognizer requests.
  int workers = 1;
};

/// Source rules, the provided-transcript shortcut, then dual-recognizer
/// classification. Per-record failures are isolated into `errors`.
CurationResult curate(std::span<const ManifestEntry> manifest, const CurationRules& rules,
                      AsrClient& asr_primary, AsrClient& asr_secondary,
                      const CurateOptions& options = {});

/// One JSON object per line, schema "duet.segment/1".
std::string record_to_json_line(const SegmentRecord& record);
SegmentRecord record_from_json_line(const std::string& line);
void write_records(const std::filesystem::path& path, std::span<const SegmentRecord> records);

/// {"counts": {...}, "errors": [...]}
std::string curation_summary_json(const CurationResult& result);

}  // namespace duet

#endif  // DUET_CURATE_HPP_
