"""Asset class failure prediction from condition data.

Condition records are clustered with k-means over mixed features, clusters
get conditional ages, and a logistic classifier on physical and conditional
age predicts Working/Failed status, optionally years ahead via aging rates.
A Weibull model on physical age serves as the baseline.
"""
__version__ = "0.1.0"
