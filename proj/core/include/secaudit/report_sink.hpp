#pragma once

#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include "secaudit/compliance.hpp"

namespace secaudit {

struct DeliveryReceipt {
  std::string sink_id;
  std::string location;
};

/// Outbound destination for compliance reports.
class ReportSink {
 public:
  virtual ~ReportSink() = default;
  virtual DeliveryReceipt deliver(const ComplianceReport& report) = 0;
};

/// Plain-text message body. First line is "COMPLIANT" or "NON-COMPLIANT";
/// every gap gets its own "GAP: " line.
std::string render_report_body(const ComplianceReport& report);

/// Writes `<subject>_<timestamp>[_n].txt` plus a `.json` sidecar into a
/// directory, creating it if needed. Throws Error(SinkUnavailable).
class FileReportSink final : public ReportSink {
 public:
  explicit FileReportSink(std::filesystem::path directory);
  DeliveryReceipt deliver(const ComplianceReport& report) override;

 private:
  std::filesystem::path directory_;
  std::mutex mutex_;
};

/// Keeps delivered reports in memory; used when no report directory is set.
class MemoryReportSink final : public ReportSink {
 public:
  DeliveryReceipt deliver(const ComplianceReport& report) override;
  std::vector<ComplianceReport> reports() const;

 private:
  mutable std::mutex mutex_;
  std::vector<ComplianceReport> reports_;
};

DeliveryReceipt emit_report(const ComplianceReport& report, ReportSink& sink);

}  // namespace secaudit
