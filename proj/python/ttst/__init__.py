# Copyright 2026 The ttst Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Transducer text-to-speech on a synthetic codec."""

from ._core import (
    Codec,
    ConfigError,
    DegenerateOutputError,
    DimensionError,
    Error,
    IndexError,
    InputError,
    IoError,
    NumericalError,
    ValidationError,
    Vocab,
    align,
    best_path,
    datagen,
    default_config,
    evaluate,
    param_count,
    rnnt_grad,
    rnnt_loss,
    run_cli,
    synth,
    train,
)

__all__ = [
    "Codec",
    "ConfigError",
    "DegenerateOutputError",
    "DimensionError",
    "Error",
    "IndexError",
    "InputError",
    "IoError",
    "NumericalError",
    "ValidationError",
    "Vocab",
    "align",
    "best_path",
    "datagen",
    "default_config",
    "evaluate",
    "param_count",
    "rnnt_grad",
    "rnnt_loss",
    "run_cli",
    "synth",
    "train",
]
