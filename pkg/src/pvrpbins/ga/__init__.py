from .algorithm import RunResult, Score, fitness, run, score_schedule, tournament_select
from .config import GaConfig, load_config, parse_config
from .operators import crossover_mask, crossover_perm, mutate_mask, mutate_perm

__all__ = [
    "GaConfig", "RunResult", "Score", "crossover_mask", "crossover_perm", "fitness",
    "load_config", "mutate_mask", "mutate_perm", "parse_config", "run",
    "score_schedule", "tournament_select",
]
