from poslog.semantics.structures import FiniteStructure, UniverseClass
from poslog.semantics.evaluation import evaluate, satisfies
from poslog.semantics.homomorphisms import Homomorphism, homomorphisms, is_immersion
from poslog.semantics.closedness import continue_to_pec, is_pec, joint_continuation
