from .entity import Entity
from .article import Article
from .record import Triplet, HypothesisRecord, IdentityKey
