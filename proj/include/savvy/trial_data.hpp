#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace savvy {

enum class Group { A, B };  // A = experimental, B = control

// Raw type-of-first-event codes as delivered by the sponsor.
enum class EventType : int { Censored = 0, AE = 1, HardCompeting = 2, SoftCompeting = 3 };

// Event codes after a competing-event scheme has been applied.
enum class Status : int { Censored = 0, Event = 1, Competing = 2 };

// AllEvents / DeathOnly: soft competing events count as competing / as censored.
// The composite variants merge the AE with the competing set of the paired scheme.
enum class Scheme { AllEvents, DeathOnly, CompositeAllEvents, CompositeDeathOnly };

inline constexpr Scheme kAllSchemes[] = {Scheme::AllEvents, Scheme::DeathOnly,
                                         Scheme::CompositeAllEvents,
                                         Scheme::CompositeDeathOnly};

std::string_view to_string(Group group);
std::string_view to_string(Scheme scheme);
std::string_view to_string(Status status);
Scheme parse_scheme(std::string_view name);

constexpr bool is_composite(Scheme scheme) {
  return scheme == Scheme::CompositeAllEvents || scheme == Scheme::CompositeDeathOnly;
}

constexpr Status remap(EventType type, Scheme scheme) {
  switch (type) {
    case EventType::Censored:
      return Status::Censored;
    case EventType::AE:
      return Status::Event;
    case EventType::HardCompeting:
      return is_composite(scheme) ? Status::Event : Status::Competing;
    case EventType::SoftCompeting:
      switch (scheme) {
        case Scheme::AllEvents:
          return Status::Competing;
        case Scheme::DeathOnly:
        case Scheme::CompositeDeathOnly:
          return Status::Censored;
        case Scheme::CompositeAllEvents:
          return Status::Event;
      }
  }
  return Status::Censored;
}

struct EventRecord {
  int ae_id = 0;
  std::string patient_id;
  std::string group_label;  // label as it appeared in the input
  Group group = Group::A;
  double time = 0.0;  // days, > 0
  EventType type = EventType::Censored;
};

// One patient's first-event data for a single AE, stripped of identity.
// This is the unit the bootstrap resamples.
struct PatientRecord {
  Group group = Group::A;
  double time = 0.0;
  EventType type = EventType::Censored;
};

struct Exclusion {
  std::size_t row_number = 0;  // 1-based data row, header excluded
  std::string raw;
  std::string reason;
};

// Validated per-trial records. Immutable after construction.
class TrialDataset {
 public:
  // Throws ValidationError on non-positive times or duplicate (ae_id, patient_id).
  TrialDataset(std::string savvy_id, std::vector<EventRecord> records,
               std::vector<Exclusion> exclusions = {});

  const std::string& savvy_id() const { return savvy_id_; }
  std::span<const EventRecord> records() const { return records_; }
  const std::vector<Exclusion>& exclusion_log() const { return exclusions_; }
  std::size_t input_rows() const { return records_.size() + exclusions_.size(); }

  std::vector<int> ae_ids() const;  // ascending
  std::vector<PatientRecord> sample(int ae_id) const;
  std::size_t group_size(int ae_id, Group group) const;

 private:
  std::string savvy_id_;
  std::vector<EventRecord> records_;
  std::vector<Exclusion> exclusions_;
};

struct AnalysisRecord {
  Group group = Group::A;
  double time = 0.0;
  Status status = Status::Censored;
};

// A single AE of a trial after remapping event types under a scheme.
class AnalysisDataset {
 public:
  AnalysisDataset(std::string savvy_id, int ae_id, Scheme scheme,
                  std::vector<AnalysisRecord> records);

  const std::string& savvy_id() const { return savvy_id_; }
  int ae_id() const { return ae_id_; }
  Scheme scheme() const { return scheme_; }
  std::span<const AnalysisRecord> records() const { return records_; }
  std::size_t size(Group group) const;
  std::vector<double> times(Group group) const;

 private:
  std::string savvy_id_;
  int ae_id_;
  Scheme scheme_;
  std::vector<AnalysisRecord> records_;
};

struct ParseOptions {
  std::string experimental_label = "A";
};

// Parses the five-column trial CSV. Malformed rows go to the exclusion log;
// a bad header, a row with the wrong column count, more than two group labels
// or a duplicate (ae_id, patient_id) throw ValidationError.
TrialDataset parse_trial_csv(std::string_view content, std::string savvy_id,
                             const ParseOptions& options = {});

std::string serialize_trial_csv(const TrialDataset& dataset);
std::string serialize_exclusions_csv(const TrialDataset& dataset);

AnalysisDataset apply_event_scheme(const TrialDataset& dataset, int ae_id, Scheme scheme);
std::vector<AnalysisRecord> apply_event_scheme(std::span<const PatientRecord> sample,
                                               Scheme scheme);

struct DescriptiveCell {
  std::optional<Status> status;  // nullopt = all types
  std::optional<Group> group;    // nullopt = both groups
  std::size_t count = 0;
  // Undefined (nullopt) for empty strata.
  std::optional<double> mean, median, min, max;
};

struct DescriptiveSummary {
  std::vector<DescriptiveCell> cells;

  const DescriptiveCell& at(std::optional<Status> status, std::optional<Group> group) const;
};

DescriptiveSummary describe(const AnalysisDataset& dataset);

}  // namespace savvy
