// include/advasr/cli.h

// Copyright 2026  The advasr authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef ADVASR_CLI_H_
#define ADVASR_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace advasr {

// Commands: synth-data, train, decode, eval, report.
// Exit codes: 0 ok, 1 usage, 2 data error, 3 numerical failure.
// Reports and status go to `out`; diagnostics go to `err`.
int cli_run(const std::vector<std::string> &args, std::ostream &out,
            std::ostream &err);

}  // namespace advasr

#endif  // ADVASR_CLI_H_
