#pragma once

namespace kpz::lab {

// kpzlab entry point: 0 when every check passed, 1 on a failed check, 2 on config or usage errors.
int cli_main(int argc, char** argv);

}  // namespace kpz::lab
