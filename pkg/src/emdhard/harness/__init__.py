"""Generators, the end-to-end pipeline, verification suites and the CLI."""

from .generators import GeneratorSpec, generate
from .pipeline import pipeline_hs_via_emd
from .verify import CHECKS, VerificationReport, run_check
