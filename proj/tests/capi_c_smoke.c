// Copyright 2026 The ginas Authors.
//
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

/* Compiled as C to keep the public header C-clean. */
#include <stdio.h>
#include <string.h>

#include "ginas/ginas.h"

int main(void) {
  ginas_config* config = NULL;
  const char* value = NULL;
  if (ginas_config_create(&config) != GINAS_OK) return 1;
  if (ginas_config_set(config, "seed", "3") != GINAS_OK) return 1;
  if (ginas_config_get(config, "seed", &value) != GINAS_OK || strcmp(value, "3") != 0) return 1;
  if (ginas_config_set(config, "bogus", "1") != GINAS_ERR_INVALID_ARGUMENT) return 1;
  ginas_config_destroy(config);
  printf("ginas %s\n", ginas_version());
  return 0;
}
