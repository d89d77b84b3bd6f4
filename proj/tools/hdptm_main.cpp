#include "hdptm/cli.hpp"

int main(int argc, char** argv) {
  return hdptm::parse_and_dispatch(argc, argv);
}
