// pymodule.cpp - python bindings for the core operations
#include <pybind11/pybind11.h>

namespace py = pybind11;

PYBIND11_MODULE(_tfish, m) {
  m.doc() = "time-frequency structure toolkit (placeholder)";
}
