from typing import Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field, model_validator

from ..exceptions import ConfigurationError
from ..seeding import derive_rng


class FoldAssignment(BaseModel):
    """Site -> fold index; every tile of a site shares its site's fold"""
    k: int = Field(ge=2)
    assignment: Dict[str, int]

    @model_validator(mode="after")
    def _check_partition(self) -> "FoldAssignment":
        sizes = [0] * self.k
        for site, fold in self.assignment.items():
            if not 0 <= fold < self.k:
                raise ValueError(f"site {site} assigned to fold {fold}, outside 0..{self.k - 1}")
            sizes[fold] += 1
        if max(sizes) - min(sizes) > 1:
            raise ValueError(f"fold sizes {sizes} differ by more than one")
        return self

    def fold_sites(self, fold: int) -> List[str]:
        return sorted(site for site, f in self.assignment.items() if f == fold)

    def training_sites(self, fold: int) -> List[str]:
        return sorted(site for site, f in self.assignment.items() if f != fold)

    def sizes(self) -> List[int]:
        return [len(self.fold_sites(f)) for f in range(self.k)]


def kfold_split(
    sites: Sequence[str],
    k: int,
    seed: int,
    strata: Optional[Dict[str, int]] = None,
) -> FoldAssignment:
    """Permute sites by seed and deal them round-robin into k folds.

    With ``strata`` (site -> class) each class is permuted separately and
    dealt in turn, so every fold gets its share of each class.
    """
    unique = sorted(set(sites))
    if len(unique) != len(sites):
        raise ConfigurationError("site list contains duplicates")
    if k < 2:
        raise ConfigurationError(f"need at least 2 folds, got {k}")
    if k > len(unique):
        raise ConfigurationError(f"{k} folds requested for only {len(unique)} sites")

    rng = derive_rng(seed, "folds")
    if strata is None:
        groups = [unique]
    else:
        groups = [[s for s in unique if strata.get(s, 0) == value] for value in sorted(set(strata.get(s, 0) for s in unique))]
    ordered: List[str] = []
    for group in groups:
        ordered.extend(group[i] for i in rng.permutation(len(group)))
    return FoldAssignment(k=k, assignment={site: index % k for index, site in enumerate(ordered)})
