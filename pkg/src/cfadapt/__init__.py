"""Concept-level counterfactual diagnosis and test-time policy adaptation.

Pipeline: behavior-clone a pixel-input policy, diagnose its failures under
distribution shift with minimum-edit counterfactual demonstrations, collect
(simulated or live human) task-irrelevance feedback, and finetune via
concept-targeted data augmentation.
"""

__version__ = "0.1.0"
