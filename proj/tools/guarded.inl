#pragma once

#include <spdlog/spdlog.h>

#include "stratdepth/error.hpp"

namespace stratdepth::cli {

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const UsageError& e) {
    spdlog::error("usage: {}", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return kExitDataError;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitDataError;
  }
}

}  // namespace stratdepth::cli
