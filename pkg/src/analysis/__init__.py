"""Statistics, overhead and latency calculators, verdicts and reports."""
