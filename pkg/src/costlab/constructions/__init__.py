"""Stage-by-stage constructions with invariant checking."""

from .benign import BenignRun, benign_to_fragment, choose_sequence, g_inverse
from .capture import (
    CaptureRun,
    EmptyTest,
    JoinCaptureTest,
    NoncaptureRun,
    TestSchedule,
    build_capture_test,
    build_noncapture_open,
)
from .criteria import CriterionReport, block_ends, criterion_check, density_partition
from .obedient import ObedientRun, run_obedient_ce, w_family_from_spec
from .ravenous import LayeredCopy, PrefixTest, RavenousRun, default_ravenous, random_ce, run_ravenous
from .schedules import EmptySchedule, RandomSchedule, ScriptedSchedule, schedule_from_spec
from .shift import Mirror, ShiftRun, alphas, family_from_spec, run_shift
from .smart import SmartRun, floored, run_smart
from .trace import ANCHORS, StageTrace

__all__ = [
    "ANCHORS", "BenignRun", "CaptureRun", "CriterionReport", "EmptySchedule", "EmptyTest",
    "JoinCaptureTest", "LayeredCopy", "Mirror", "NoncaptureRun", "ObedientRun", "PrefixTest",
    "RandomSchedule", "RavenousRun", "ScriptedSchedule", "ShiftRun", "SmartRun", "StageTrace",
    "TestSchedule", "alphas", "benign_to_fragment", "block_ends", "build_capture_test",
    "build_noncapture_open", "choose_sequence", "criterion_check", "default_ravenous",
    "density_partition", "family_from_spec", "floored", "g_inverse", "random_ce", "run_obedient_ce",
    "run_ravenous", "run_shift", "run_smart", "schedule_from_spec", "w_family_from_spec",
]
