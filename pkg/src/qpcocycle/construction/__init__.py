"""Inductive construction of angle functions with a resonant twin."""
from .builder import (Correction, CorrectionLedger, PhiField, StepOptions, StepRejected,
                      StepReport, build_phi_n, build_phi_tilde_n)
from .exceptional import ExceptionalSet, exceptional_set
from .gap import (CancellationProfile, LEGapResult, PreconditionError, cancellation_profile,
                  le_gap_experiment)
from .gevrey import GevreySeminorm, gevrey_seminorm
from .samples import (Bump, CinfSample, ClSample, ConstantSample, GevreySample,
                      SampleFunction, make_sample)
from .schedule import LambdaSchedule, lambda_schedule


def bump(n: int, nu: float, table) -> Bump:
    """Cut-off for the symmetric ``I_n`` of ``table``."""
    if not nu > 1:
        raise ValueError("nu must exceed 1")
    return Bump(float(table.b(n)), nu)


__all__ = [
    "Bump", "CancellationProfile", "CinfSample", "ClSample", "ConstantSample", "Correction",
    "CorrectionLedger", "ExceptionalSet", "GevreySample", "GevreySeminorm", "LEGapResult",
    "LambdaSchedule", "PhiField", "PreconditionError", "SampleFunction", "StepOptions",
    "StepRejected", "StepReport", "build_phi_n", "build_phi_tilde_n", "bump",
    "cancellation_profile", "exceptional_set", "gevrey_seminorm", "lambda_schedule",
    "le_gap_experiment", "make_sample",
]
