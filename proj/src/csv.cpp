#include "svda/csv.hpp"

#include <charconv>
#include <fstream>

namespace svda::csv {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);  // binary keeps LF endings everywhere
  if (!os) throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
  return os;
}

void finish_csv(std::ofstream& os, const std::filesystem::path& path) {
  if (!os) throw Error(ErrorKind::io, "write failed for " + path.string());
}

void write_metric_fields(std::ostream& os, const DepthMetrics& m) {
  os << format_double(m.abs_rel) << ',' << format_double(m.sq_rel) << ','
     << format_double(m.rmse) << ',' << format_double(m.rmse_log) << ','
     << format_double(m.srmse_log) << ',' << format_double(m.delta1);
}

}  // namespace

void write_epochs(const std::filesystem::path& path, const std::vector<EpochLog>& logs) {
  std::ofstream os = open_csv(path);
  os << "epoch,train_loss,val_loss,abs_rel,sq_rel,rmse,rmse_log,srmse_log,delta1\n";
  for (const EpochLog& log : logs) {
    os << log.epoch << ',' << format_double(log.train_loss) << ','
       << format_double(log.val_loss) << ',';
    write_metric_fields(os, log.val_metrics);
    os << '\n';
  }
  finish_csv(os, path);
}

void write_indicators(const std::filesystem::path& path, const std::vector<EpochLog>& logs) {
  std::ofstream os = open_csv(path);
  os << "epoch,layer,head,indicator,value\n";
  for (const EpochLog& log : logs)
    for (const IndicatorSample& s : log.indicators)
      os << s.epoch << ',' << s.layer << ',' << s.head << ',' << to_string(s.name) << ','
         << format_double(s.value) << '\n';
  finish_csv(os, path);
}

void write_metrics(const std::filesystem::path& path, const std::vector<MetricsRow>& rows) {
  std::ofstream os = open_csv(path);
  os << "mechanism,abs_rel,sq_rel,rmse,rmse_log,srmse_log,delta1\n";
  for (const MetricsRow& row : rows) {
    os << row.mechanism << ',';
    write_metric_fields(os, row.metrics);
    os << '\n';
  }
  finish_csv(os, path);
}

void write_layerwise(const std::filesystem::path& path, const std::vector<LayerwiseRow>& rows) {
  std::ofstream os = open_csv(path);
  os << "layer,head,indicator,min,q25,median,q75,max\n";
  for (const LayerwiseRow& row : rows)
    os << row.layer << ',' << row.head << ',' << row.indicator << ','
       << format_double(row.min) << ',' << format_double(row.q25) << ','
       << format_double(row.median) << ',' << format_double(row.q75) << ','
       << format_double(row.max) << '\n';
  finish_csv(os, path);
}

void write_trends(const std::filesystem::path& path, const std::vector<TrendRow>& rows) {
  std::ofstream os = open_csv(path);
  os << "mechanism,indicator,first10_mean,last10_mean,delta\n";
  for (const TrendRow& row : rows)
    os << to_string(row.mechanism) << ',' << to_string(row.indicator) << ','
       << format_double(row.first_mean) << ',' << format_double(row.last_mean) << ','
       << format_double(row.delta) << '\n';
  finish_csv(os, path);
}

void write_compare(const std::filesystem::path& path, const CompareResult& result) {
  std::ofstream os = open_csv(path);
  os << "mechanism,epoch,train_loss,val_loss,abs_rel,sq_rel,rmse,rmse_log,srmse_log,delta1\n";
  const auto write_run = [&os](const char* mechanism, const TrainResult& run) {
    for (const EpochLog& log : run.logs) {
      os << mechanism << ',' << log.epoch << ',' << format_double(log.train_loss) << ','
         << format_double(log.val_loss) << ',';
      write_metric_fields(os, log.val_metrics);
      os << '\n';
    }
  };
  write_run("svda", result.svda_run);
  write_run("baseline", result.baseline_run);
  finish_csv(os, path);
}

}  // namespace svda::csv
