#include "teleop/datapipe/writer.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>

#include "teleop/datapipe/record_io.hpp"
#include "teleop/metrics/metrics.hpp"

namespace teleop::datapipe {

namespace fs = std::filesystem;

DemoWriter::DemoWriter(const fs::path& dir, RecordHeader header) : header_(std::move(header)) {
  fs::create_directories(dir);
  path_ = record_path(dir, header_.demo_id);
  file_ = std::fopen(path_.c_str(), "wx");
  if (!file_) throw Error(ErrorCode::CorruptRecord, "cannot create " + path_.string());
  if (::flock(::fileno(file_), LOCK_EX | LOCK_NB) != 0) {
    std::fclose(file_);
    file_ = nullptr;
    throw Error(ErrorCode::CorruptRecord, "cannot lock " + path_.string());
  }
  write_line(header_line(header_));
}

DemoWriter::~DemoWriter() {
  if (file_) abandon_for_test();
}

void DemoWriter::abandon_for_test() {
  if (!file_) return;
  std::fflush(file_);
  std::fclose(file_);  // closing releases the lock
  file_ = nullptr;
}

void DemoWriter::discard() {
  if (!file_) return;
  std::fclose(file_);
  file_ = nullptr;
  std::error_code ec;
  std::filesystem::remove(path_, ec);
}

void DemoWriter::write_line(const std::string& s) {
  if (std::fwrite(s.data(), 1, s.size(), file_) != s.size() || std::fputc('\n', file_) == EOF) {
    throw Error(ErrorCode::CorruptRecord, "write failed for " + path_.string());
  }
}

void DemoWriter::log_tick(const TickRow& row) {
  if (!file_) throw Error(ErrorCode::CorruptRecord, "record " + header_.demo_id + " is sealed");
  if (!rows_.empty() && row.tick <= rows_.back().tick) {
    throw Error(ErrorCode::OutOfOrderTick, "tick " + std::to_string(row.tick) + " after tick " +
                                               std::to_string(rows_.back().tick));
  }
  write_line(row_line(row));
  rows_.push_back(row);
}

DemonstrationRecord DemoWriter::finalize(Outcome outcome, std::int64_t reset_count) {
  if (!file_) throw Error(ErrorCode::CorruptRecord, "record " + header_.demo_id + " is sealed");
  DemonstrationRecord rec;
  rec.header = header_;
  rec.rows = std::move(rows_);
  rec.outcome = outcome;
  rec.reset_count = reset_count;
  rec.dropped_commands = dropped_;
  rec.latency = std::move(latency_);
  if (!rec.rows.empty()) rec.report = metrics::build_report(rec);
  write_line(footer_line(rec));
  std::fflush(file_);
  ::fsync(::fileno(file_));
  std::fclose(file_);
  file_ = nullptr;
  return rec;
}

ScanResult scan(const fs::path& dir) {
  ScanResult out;
  if (!fs::exists(dir)) return out;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == kRecordExtension) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& p : files) {
    const int fd = ::open(p.c_str(), O_RDONLY | O_CLOEXEC);
    if (fd < 0) continue;
    if (::flock(fd, LOCK_SH | LOCK_NB) != 0) {
      ::close(fd);
      out.in_progress.push_back(p);
      continue;
    }
    bool ok = true;
    try {
      read_record(p);
    } catch (const Error&) {
      ok = false;
    }
    ::close(fd);
    if (ok) {
      out.sealed.push_back(p);
    } else {
      const fs::path q = dir / kQuarantineDir;
      fs::create_directories(q);
      fs::rename(p, q / p.filename());
      out.quarantined.push_back(q / p.filename());
    }
  }
  return out;
}

}  // namespace teleop::datapipe
