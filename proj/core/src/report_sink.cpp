#include "secaudit/report_sink.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <ctime>

#include "secaudit/errors.hpp"
#include "secaudit/serialization.hpp"

namespace secaudit {
namespace {

std::string sanitize(std::string_view subject) {
  std::string out;
  for (unsigned char c : subject) out += (std::isalnum(c) || c == '-' || c == '_') ? static_cast<char>(c) : '_';
  return out.empty() ? "report" : out;
}

std::string compact_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
#ifdef _WIN32
  gmtime_s(&tm, &t);
#else
  gmtime_r(&t, &tm);
#endif
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

// Creates the file only if it does not exist yet.
bool write_exclusive(const std::filesystem::path& path, const std::string& content) {
  std::FILE* f = std::fopen(path.string().c_str(), "wx");
  if (f == nullptr) return false;
  const bool ok = std::fwrite(content.data(), 1, content.size(), f) == content.size();
  return std::fclose(f) == 0 && ok;
}

}  // namespace

std::string render_report_body(const ComplianceReport& report) {
  std::string body = report.overall == Compliance::Compliant ? "COMPLIANT\n" : "NON-COMPLIANT\n";
  body += "Subject: " + report.subject + "\n";
  body += "Audit date: " + to_iso(report.audit_date) + "\n";
  if (!report.task_query.empty()) body += "Task: " + report.task_query + "\n";
  body += "Rules evaluated: " + std::to_string(report.verdicts.size()) + ", gaps: " +
          std::to_string(report.gap_count()) + "\n";
  for (const auto& v : report.verdicts) {
    if (v.gap) body += "GAP: " + *v.gap + "\n";
  }
  return body;
}

FileReportSink::FileReportSink(std::filesystem::path directory) : directory_(std::move(directory)) {}

DeliveryReceipt FileReportSink::deliver(const ComplianceReport& report) {
  std::lock_guard lock(mutex_);
  std::error_code ec;
  std::filesystem::create_directories(directory_, ec);
  if (!std::filesystem::is_directory(directory_, ec))
    throw Error(ErrorCode::SinkUnavailable, "report directory unavailable: " + directory_.string());

  const std::string stem = sanitize(report.subject) + "_" + compact_timestamp();
  const std::string body = render_report_body(report);
  const std::string sidecar = report_to_json(report);

  for (int n = 0; n < 1000; ++n) {
    const std::string name = n == 0 ? stem : stem + "_" + std::to_string(n);
    const auto txt = directory_ / (name + ".txt");
    const auto json = directory_ / (name + ".json");
    if (std::filesystem::exists(json, ec)) continue;
    if (!write_exclusive(txt, body)) {
      if (errno == EEXIST) continue;
      throw Error(ErrorCode::SinkUnavailable, "cannot write " + txt.string());
    }
    if (!write_exclusive(json, sidecar)) {
      std::filesystem::remove(txt, ec);
      throw Error(ErrorCode::SinkUnavailable, "cannot write " + json.string());
    }
    return DeliveryReceipt{"file", txt.string()};
  }
  throw Error(ErrorCode::SinkUnavailable, "could not allocate a unique report filename in " + directory_.string());
}

DeliveryReceipt MemoryReportSink::deliver(const ComplianceReport& report) {
  std::lock_guard lock(mutex_);
  reports_.push_back(report);
  return DeliveryReceipt{"memory", "#" + std::to_string(reports_.size())};
}

std::vector<ComplianceReport> MemoryReportSink::reports() const {
  std::lock_guard lock(mutex_);
  return reports_;
}

DeliveryReceipt emit_report(const ComplianceReport& report, ReportSink& sink) {
  const bool all_compliant = report.gap_count() == 0 &&
                             std::all_of(report.verdicts.begin(), report.verdicts.end(),
                                         [](const Verdict& v) { return v.compliant; });
  if ((report.overall == Compliance::Compliant) != all_compliant)
    throw Error(ErrorCode::InvalidArgument, "report overall status contradicts its verdicts");
  for (const auto& v : report.verdicts) {
    if (v.gap.has_value() == v.compliant)
      throw Error(ErrorCode::InvalidArgument, "verdict " + v.rule_id + " must carry a gap iff non-compliant");
  }
  return sink.deliver(report);
}

}  // namespace secaudit
