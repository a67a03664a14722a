"""Placeholder."""
LerEstimate = LambdaFit = per_round_rate = physical_baseline = estimate_ler = fit_lambda = pseudo_threshold_sweep = megaquop_requirements = bell_wait_cycles_from_efficiency = None
