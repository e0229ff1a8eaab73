#include "curveflow/ensemble.hpp"

#include <cstdlib>
#include <string>

namespace curveflow::ensemble {

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CURVEFLOW_WORKERS")) {
    try {
      const int w = std::stoi(env);
      if (w > 0) return w;
    } catch (...) {
    }
  }
  return omp_get_max_threads();
}

}  // namespace curveflow::ensemble
