#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "detangle/error.hpp"

int main(int argc, char** argv) {
  detangle::set_warnings_enabled(false);
  doctest::Context context(argc, argv);
  return context.run();
}
