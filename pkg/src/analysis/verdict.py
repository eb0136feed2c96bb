"""Non-interference verdicts over replayed outcome logs."""

from collections.abc import Iterable
from itertools import zip_longest
from typing import Protocol

from src.models.results import AccessOutcome, Verdict


class LoggedOutcome(Protocol):
    did: int
    outcome: AccessOutcome


def noninterference_verdict(
    log_with: Iterable[LoggedOutcome],
    log_without: Iterable[LoggedOutcome],
    subject_did: int,
) -> Verdict:
    """PASS iff the subject's (hit, sid, cycles) sequences agree element-wise.

    Both logs must come from the same subject event subsequence; a length
    mismatch is reported as a divergence at the end of the shorter log.
    """
    seen_with = [e.outcome.projection() for e in log_with if e.did == subject_did]
    seen_without = [e.outcome.projection() for e in log_without if e.did == subject_did]
    for index, (a, b) in enumerate(zip_longest(seen_with, seen_without)):
        if a != b:
            return Verdict(
                passed=False,
                subject_did=subject_did,
                compared=index,
                index=index,
                with_value=a,
                without_value=b,
            )
    return Verdict(passed=True, subject_did=subject_did, compared=len(seen_with))
