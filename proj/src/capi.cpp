#include "upress/upress.h"

#include "upress/experiment.hpp"

#include <cstring>
#include <exception>
#include <new>
#include <string>

struct upress_config {
  upress::RunConfig config;
};

namespace {

thread_local std::string g_reason;
thread_local std::string g_message;

int record(int status, std::string reason, std::string message) {
  g_reason = std::move(reason);
  g_message = std::move(message);
  return status;
}

int ok() { return record(UPRESS_OK, {}, {}); }

int from_outcome(const upress::RunOutcome& out) {
  return record(static_cast<int>(out.code), out.reason, out.message);
}

template <class F>
int guard(F&& body) {
  try {
    return body();
  } catch (const upress::Error& e) {
    return record(static_cast<int>(upress::exit_code_for(e.code())), std::string(upress::reason(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return record(UPRESS_ERR_INTERNAL, "internal", "out of memory");
  } catch (const std::exception& e) {
    return record(UPRESS_ERR_INTERNAL, "internal", e.what());
  }
}

int null_argument(const char* what) { return record(UPRESS_ERR_USAGE, "invalid-argument", std::string(what) + " is NULL"); }

int make_handle(upress::RunConfig config, upress_config** out) {
  *out = new upress_config{std::move(config)};
  return ok();
}

}  // namespace

extern "C" {

const char* upress_status_name(int status) {
  switch (status) {
    case UPRESS_OK:
      return "ok";
    case UPRESS_ERR_INTERNAL:
      return "internal";
    case UPRESS_ERR_USAGE:
      return "usage";
    case UPRESS_ERR_REFUSED:
      return "refused";
    case UPRESS_ERR_CHECK_FAILED:
      return "check-failed";
    default:
      return "unknown";
  }
}

const char* upress_last_reason(void) { return g_reason.c_str(); }
const char* upress_last_error(void) { return g_message.c_str(); }

int upress_config_from_file(const char* path, upress_config** out) {
  if (!path || !out) return null_argument("path or out");
  return guard([&] { return make_handle(upress::load_config(path), out); });
}

int upress_config_from_string(const char* text, upress_config** out) {
  if (!text || !out) return null_argument("text or out");
  return guard([&] { return make_handle(upress::parse_config(text), out); });
}

int upress_config_from_preset(const char* name, upress_config** out) {
  if (!name || !out) return null_argument("name or out");
  return guard([&] { return make_handle(upress::preset(name), out); });
}

void upress_config_free(upress_config* config) { delete config; }

int upress_config_set_seed(upress_config* config, uint64_t seed) {
  if (!config) return null_argument("config");
  config->config.seed = seed;
  return ok();
}

int upress_config_set_jobs(upress_config* config, int jobs) {
  if (!config) return null_argument("config");
  if (jobs < 1) return record(UPRESS_ERR_USAGE, "config", "jobs: must be >= 1");
  config->config.pressure.jobs = jobs;
  return ok();
}

int upress_config_set_output_dir(upress_config* config, const char* dir) {
  if (!config || !dir) return null_argument("config or dir");
  config->config.output_dir = dir;
  return ok();
}

int upress_config_validate(const upress_config* config) {
  if (!config) return null_argument("config");
  return guard([&] {
    upress::validate_config(config->config);
    return ok();
  });
}

int upress_config_to_string(const upress_config* config, char** out) {
  if (!config || !out) return null_argument("config or out");
  return guard([&] {
    const auto text = upress::serialize_config(config->config);
    char* buf = new char[text.size() + 1];
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *out = buf;
    return ok();
  });
}

void upress_string_free(char* text) { delete[] text; }

size_t upress_preset_count(void) { return upress::preset_names().size(); }

const char* upress_preset_name(size_t index) {
  static const auto names = upress::preset_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

int upress_run_estimate(const upress_config* config, double* estimate) {
  if (!config) return null_argument("config");
  return guard([&] {
    const auto out = upress::run_estimate(config->config);
    if (estimate && out.estimate) *estimate = *out.estimate;
    return from_outcome(out);
  });
}

int upress_run_verify(const upress_config* config) {
  if (!config) return null_argument("config");
  return guard([&] { return from_outcome(upress::run_verify(config->config)); });
}

int upress_run_sweep(const upress_config* config) {
  if (!config) return null_argument("config");
  return guard([&] { return from_outcome(upress::run_sweep(config->config)); });
}

int upress_run_oracle(const upress_config* config) {
  if (!config) return null_argument("config");
  return guard([&] { return from_outcome(upress::run_oracle(config->config)); });
}

int upress_write_error_report(const char* dir, const char* command, int status) {
  if (!dir || !command) return null_argument("dir or command");
  if (status <= UPRESS_OK || status > UPRESS_ERR_CHECK_FAILED)
    return record(UPRESS_ERR_USAGE, "invalid-argument", "status is not a failure");
  const std::string reason = g_reason, message = g_message;
  const int st = guard([&] {
    upress::write_error_report(dir, command, static_cast<upress::ExitCode>(status), reason, message);
    return ok();
  });
  // The reported failure stays the thread's last error.
  if (st == UPRESS_OK) record(status, reason, message);
  return st;
}

int upress_estimate_value(const upress_config* config, double* estimate) {
  if (!config || !estimate) return null_argument("config or estimate");
  return guard([&] {
    const auto& c = config->config;
    upress::validate_config(c);
    const auto sys = upress::make_system(c.system);
    const auto table = upress::pressure_table(sys, upress::make_potential(c.potential), upress::make_base_point(c),
                                              c.pressure);
    const auto est = upress::estimate_pressure(table);
    if (!est.value) throw upress::Error(upress::ErrorCode::UnderResolved, "table does not support an estimate");
    *estimate = *est.value;
    return ok();
  });
}

int upress_unstable_rate(const upress_config* config, double* rate) {
  if (!config || !rate) return null_argument("config or rate");
  return guard([&] {
    *rate = upress::make_system(config->config.system).unstable_rate();
    return ok();
  });
}

int upress_log_sum_inequality(const double* p, const double* a, size_t n, double* lhs, double* rhs, double* gibbs) {
  if (!p || !a || !lhs || !rhs) return null_argument("p, a, lhs or rhs");
  return guard([&] {
    const auto r = upress::log_sum_inequality(std::vector<double>(p, p + n), std::vector<double>(a, a + n));
    *lhs = r.lhs;
    *rhs = r.rhs;
    if (gibbs) std::copy(r.gibbs.begin(), r.gibbs.end(), gibbs);
    return ok();
  });
}

}  // extern "C"
