// Copyright 2026 The ltr Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LTR_TOOLS_CLI_H_
#define LTR_TOOLS_CLI_H_

namespace ltr {

// Entry point of the `ltr` command. Exit codes: 0 success, 1 I/O or runtime
// failure, 2 usage error.
int cli_main(int argc, char** argv);

}  // namespace ltr

#endif  // LTR_TOOLS_CLI_H_
