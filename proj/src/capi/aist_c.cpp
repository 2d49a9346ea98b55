#include "aist/aist.h"

#include <map>
#include <memory>
#include <string>
#include <utility>

#include "core/checkpoint.hpp"
#include "core/commands.hpp"
#include "core/dataset.hpp"
#include "core/errors.hpp"
#include "core/model.hpp"
#include "core/training.hpp"
#include "core/version.hpp"

namespace {

thread_local std::string g_last_error;

template <class Fn>
aist_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return AIST_OK;
  } catch (const aist::UsageError& e) {
    g_last_error = e.what();
    return AIST_USAGE_ERROR;
  } catch (const aist::IoError& e) {
    g_last_error = e.what();
    return AIST_IO_ERROR;
  } catch (const aist::DataError& e) {
    g_last_error = e.what();
    return AIST_DATA_ERROR;
  } catch (const aist::ConfigError& e) {
    g_last_error = e.what();
    return AIST_CONFIG_ERROR;
  } catch (const aist::DivergenceError& e) {
    g_last_error = e.what();
    return AIST_DIVERGENCE_ERROR;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return AIST_INTERNAL_ERROR;
  } catch (...) {
    g_last_error = "unknown error";
    return AIST_INTERNAL_ERROR;
  }
}

}  // namespace

struct aist_options {
  aist::Options values;
};

struct aist_session {
  aist::Checkpoint ckpt;
  aist::Dataset data;
  aist::TrainContext ctx;
  std::map<std::pair<int, int>, int> by_step_region;  // (target_step, region_index)
  aist::Tape tape;
  aist::ModelNodes nodes;
};

extern "C" {

const char* aist_version(void) { return aist::kVersion; }

const char* aist_last_error(void) { return g_last_error.c_str(); }

aist_options* aist_options_new(void) { return new aist_options(); }

void aist_options_free(aist_options* opts) { delete opts; }

aist_status aist_options_set(aist_options* opts, const char* key, const char* value) {
  return guarded([&] {
    if (!opts || !key || !value) throw aist::UsageError("aist_options_set: NULL argument");
    opts->values[key] = value;
  });
}

aist_status aist_run(const char* command, const aist_options* opts) {
  return guarded([&] {
    if (!command) throw aist::UsageError("aist_run: NULL command");
    static const aist::Options kEmpty;
    aist::run_command(command, opts ? opts->values : kEmpty);
  });
}

aist_status aist_open_session(const char* checkpoint_path, const char* cache_dir,
                              aist_session** out) {
  return guarded([&] {
    if (!checkpoint_path || !cache_dir || !out)
      throw aist::UsageError("aist_open_session: NULL argument");
    auto session = std::make_unique<aist_session>();
    session->ckpt = aist::load_checkpoint(checkpoint_path);
    session->data = aist::load_cache(cache_dir);
    session->ctx =
        aist::make_eval_context(session->ckpt.config, session->data, session->ckpt.norm);
    for (size_t i = 0; i < session->ctx.windows.size(); ++i) {
      const aist::SampleWindow& w = session->ctx.windows[i];
      session->by_step_region[{w.target_step, w.region_index}] = static_cast<int>(i);
    }
    session->nodes = aist::bind_params(session->tape, session->ckpt.params);
    session->tape.freeze();
    *out = session.release();
  });
}

void aist_close_session(aist_session* session) { delete session; }

aist_status aist_session_predict(aist_session* session, int region_id, int target_step,
                                 double* count, double* norm) {
  return guarded([&] {
    if (!session || !count) throw aist::UsageError("aist_session_predict: NULL argument");
    if (!session->data.graph.has_region(region_id))
      throw aist::DataError("unknown region id " + std::to_string(region_id));
    const int region_index = session->data.graph.index_of(region_id);
    const auto it = session->by_step_region.find({target_step, region_index});
    if (it == session->by_step_region.end())
      throw aist::DataError("no complete lookback window for region " +
                            std::to_string(region_id) + " at step " +
                            std::to_string(target_step));
    const aist::SampleWindow& w = session->ctx.windows[static_cast<size_t>(it->second)];
    session->tape.reset();
    const aist::ForwardOut fwd =
        aist::forward_window(session->tape, session->nodes, session->ckpt.params,
                             session->ckpt.config, session->ctx.view, w, aist::Mode::kEval,
                             nullptr, false);
    const double y_norm = session->tape.scalar(fwd.yhat);
    *count = session->ctx.norm.invert(y_norm, w.category, w.region_index);
    if (norm) *norm = y_norm;
  });
}

}  // extern "C"
