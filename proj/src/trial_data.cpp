#include "savvy/trial_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>

#include "savvy/csv.hpp"
#include "savvy/errors.hpp"

namespace savvy {

std::string_view to_string(Group group) { return group == Group::A ? "A" : "B"; }

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::AllEvents:
      return "AllEvents";
    case Scheme::DeathOnly:
      return "DeathOnly";
    case Scheme::CompositeAllEvents:
      return "CompositeAllEvents";
    case Scheme::CompositeDeathOnly:
      return "CompositeDeathOnly";
  }
  return "?";
}

std::string_view to_string(Status status) {
  switch (status) {
    case Status::Censored:
      return "censored";
    case Status::Event:
      return "event";
    case Status::Competing:
      return "competing";
  }
  return "?";
}

Scheme parse_scheme(std::string_view name) {
  for (Scheme s : kAllSchemes) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown scheme: " + std::string(name));
}

TrialDataset::TrialDataset(std::string savvy_id, std::vector<EventRecord> records,
                           std::vector<Exclusion> exclusions)
    : savvy_id_(std::move(savvy_id)),
      records_(std::move(records)),
      exclusions_(std::move(exclusions)) {
  std::set<std::pair<int, std::string_view>> seen;
  for (const auto& r : records_) {
    if (!(r.time > 0.0) || !std::isfinite(r.time)) {
      throw ValidationError("record for patient in AE " + std::to_string(r.ae_id) +
                            " has non-positive time");
    }
    if (r.ae_id <= 0) throw ValidationError("AE id must be positive");
    if (!seen.emplace(r.ae_id, r.patient_id).second) {
      throw ValidationError("duplicate record for AE " + std::to_string(r.ae_id) +
                            ", patient " + r.patient_id);
    }
  }
}

std::vector<int> TrialDataset::ae_ids() const {
  std::set<int> ids;
  for (const auto& r : records_) ids.insert(r.ae_id);
  return {ids.begin(), ids.end()};
}

std::vector<PatientRecord> TrialDataset::sample(int ae_id) const {
  std::vector<PatientRecord> out;
  for (const auto& r : records_) {
    if (r.ae_id == ae_id) out.push_back({r.group, r.time, r.type});
  }
  return out;
}

std::size_t TrialDataset::group_size(int ae_id, Group group) const {
  return static_cast<std::size_t>(std::count_if(records_.begin(), records_.end(), [&](const auto& r) {
    return r.ae_id == ae_id && r.group == group;
  }));
}

AnalysisDataset::AnalysisDataset(std::string savvy_id, int ae_id, Scheme scheme,
                                 std::vector<AnalysisRecord> records)
    : savvy_id_(std::move(savvy_id)), ae_id_(ae_id), scheme_(scheme), records_(std::move(records)) {
  if (is_composite(scheme_)) {
    for (const auto& r : records_) {
      if (r.status == Status::Competing) {
        throw ValidationError("composite analysis dataset cannot contain competing events");
      }
    }
  }
}

std::size_t AnalysisDataset::size(Group group) const {
  return static_cast<std::size_t>(std::count_if(records_.begin(), records_.end(),
                                                [&](const auto& r) { return r.group == group; }));
}

std::vector<double> AnalysisDataset::times(Group group) const {
  std::vector<double> out;
  for (const auto& r : records_) {
    if (r.group == group) out.push_back(r.time);
  }
  return out;
}

namespace {

constexpr std::string_view kColumns[] = {"ae_id", "patient_id", "group", "time", "event_type"};

bool is_missing(const std::string& field) { return field.empty() || field == "NA"; }

template <class T>
bool parse_number(const std::string& text, T& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

TrialDataset parse_trial_csv(std::string_view content, std::string savvy_id,
                             const ParseOptions& options) {
  if (content.starts_with("\xEF\xBB\xBF")) content.remove_prefix(3);
  const auto rows = csv::lines(content);
  if (rows.empty()) throw ValidationError("empty input: missing header");

  const auto header = csv::split_line(rows.front());
  if (header.size() != std::size(kColumns)) {
    throw ValidationError("header must have columns ae_id,patient_id,group,time,event_type");
  }
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (csv::trim(header[i]) != kColumns[i]) {
      throw ValidationError("unexpected header column '" + header[i] + "', expected '" +
                            std::string(kColumns[i]) + "'");
    }
  }

  std::vector<EventRecord> records;
  std::vector<Exclusion> exclusions;
  std::set<std::string> labels;

  for (std::size_t i = 1; i < rows.size(); ++i) {
    const std::string_view raw = rows[i];
    if (csv::trim(raw).empty()) continue;
    const std::size_t row_number = i;
    auto fields = csv::split_line(raw);
    if (fields.size() != std::size(kColumns)) {
      throw ValidationError("row " + std::to_string(row_number) + ": expected 5 columns, found " +
                            std::to_string(fields.size()));
    }
    for (auto& f : fields) f = csv::trim(f);

    auto exclude = [&](std::string reason) {
      exclusions.push_back({row_number, std::string(raw), std::move(reason)});
    };

    if (std::any_of(fields.begin(), fields.end(), is_missing)) {
      exclude("missing data");
      continue;
    }
    int ae_id = 0;
    if (!parse_number(fields[0], ae_id) || ae_id <= 0) {
      exclude("invalid AE id");
      continue;
    }
    double time = 0.0;
    if (!parse_number(fields[3], time) || !std::isfinite(time)) {
      exclude("invalid event time");
      continue;
    }
    if (time < 0.0) {
      exclude("negative event time");
      continue;
    }
    if (time == 0.0) {
      exclude("zero event time");
      continue;
    }
    int type = -1;
    if (!parse_number(fields[4], type) || type < 0 || type > 3) {
      exclude("event type not in {0,1,2,3}");
      continue;
    }

    labels.insert(fields[2]);
    if (labels.size() > 2) {
      throw ValidationError("more than two treatment group labels in input");
    }
    EventRecord record;
    record.ae_id = ae_id;
    record.patient_id = fields[1];
    record.group_label = fields[2];
    record.group = fields[2] == options.experimental_label ? Group::A : Group::B;
    record.time = time;
    record.type = static_cast<EventType>(type);
    records.push_back(std::move(record));
  }

  return TrialDataset(std::move(savvy_id), std::move(records), std::move(exclusions));
}

std::string serialize_trial_csv(const TrialDataset& dataset) {
  std::ostringstream out;
  out << "ae_id,patient_id,group,time,event_type\n";
  for (const auto& r : dataset.records()) {
    out << r.ae_id << ',' << csv::escape(r.patient_id) << ',' << csv::escape(r.group_label) << ','
        << csv::format_double(r.time) << ',' << static_cast<int>(r.type) << '\n';
  }
  return out.str();
}

std::string serialize_exclusions_csv(const TrialDataset& dataset) {
  std::ostringstream out;
  out << "row_number,reason\n";
  for (const auto& e : dataset.exclusion_log()) {
    out << e.row_number << ',' << csv::escape(e.reason) << '\n';
  }
  return out.str();
}

std::vector<AnalysisRecord> apply_event_scheme(std::span<const PatientRecord> sample,
                                               Scheme scheme) {
  std::vector<AnalysisRecord> out;
  out.reserve(sample.size());
  for (const auto& r : sample) out.push_back({r.group, r.time, remap(r.type, scheme)});
  return out;
}

AnalysisDataset apply_event_scheme(const TrialDataset& dataset, int ae_id, Scheme scheme) {
  const auto sample = dataset.sample(ae_id);
  return AnalysisDataset(dataset.savvy_id(), ae_id, scheme, apply_event_scheme(sample, scheme));
}

namespace {

DescriptiveCell summarize(std::vector<double> times, std::optional<Status> status,
                          std::optional<Group> group) {
  DescriptiveCell cell;
  cell.status = status;
  cell.group = group;
  cell.count = times.size();
  if (times.empty()) return cell;
  std::sort(times.begin(), times.end());
  const double sum = std::accumulate(times.begin(), times.end(), 0.0);
  cell.mean = sum / static_cast<double>(times.size());
  const std::size_t mid = times.size() / 2;
  cell.median = times.size() % 2 == 1 ? times[mid] : 0.5 * (times[mid - 1] + times[mid]);
  cell.min = times.front();
  cell.max = times.back();
  return cell;
}

}  // namespace

const DescriptiveCell& DescriptiveSummary::at(std::optional<Status> status,
                                              std::optional<Group> group) const {
  for (const auto& c : cells) {
    if (c.status == status && c.group == group) return c;
  }
  throw std::out_of_range("no such descriptive stratum");
}

DescriptiveSummary describe(const AnalysisDataset& dataset) {
  if (dataset.records().empty()) throw ValidationError("cannot describe an empty dataset");
  const std::optional<Status> statuses[] = {Status::Event, Status::Competing, Status::Censored,
                                            std::nullopt};
  const std::optional<Group> groups[] = {Group::A, Group::B, std::nullopt};
  DescriptiveSummary summary;
  for (const auto& status : statuses) {
    for (const auto& group : groups) {
      std::vector<double> times;
      for (const auto& r : dataset.records()) {
        if ((!status || r.status == *status) && (!group || r.group == *group)) {
          times.push_back(r.time);
        }
      }
      summary.cells.push_back(summarize(std::move(times), status, group));
    }
  }
  return summary;
}

}  // namespace savvy
