// opcalc command line interface (work in progress scaffold).

#include <cstdio>

int main(int argc, char** argv) {
  (void)argc;
  (void)argv;
  std::puts("opcalc: not yet wired up");
  return 2;
}
