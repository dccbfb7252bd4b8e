from .corrector import correct, correct_all, corrected_labels, with_retries
from .learner import (
    LearnerOutput,
    LowDegreeModel,
    draw_samples,
    improper_learn_lowdegree,
    learn_monotone_agnostic,
    learn_monotone_proper,
    recommended_samples,
)
from .tester import TestVerdict, tolerant_test_cube, tolerant_test_poset
