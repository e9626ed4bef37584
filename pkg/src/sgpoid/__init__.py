"""Finite semigroupoids, relational functors, and certified cascade decompositions."""

from .core import (
    Arrow,
    NotComposableError,
    ObjectRef,
    ScopeError,
    Semigroupoid,
    SgpoidError,
    StructuralError,
    UnsupportedError,
    Violation,
    validate_semigroupoid,
)
from .decomposition import (
    Cascade,
    Codec,
    EmulationCertificate,
    InterchangeWitness,
    Kernel,
    RuleTable,
    SetEquivalenceWitness,
    TracingProduct,
    build_kernel,
    d_relation,
    decode,
    encode,
    interchangeable,
    pinhole_cascade,
    preimage_sets_equivalent,
    rule_table,
    tracing_product,
    verify_emulation,
)
from .pipeline import DecompositionResult, decompose_functor, decompose_morphism
from .relational import (
    Classification,
    ObjectRelation,
    RelationalFunctor,
    classify,
    compose_functors,
    identity_functor,
    induced_object_relation,
    preimages,
    validate_relational_functor,
    validate_relational_morphism_ts,
)
from .transformation import (
    DiagnosticReport,
    ImageTyping,
    PinholeTyping,
    RelationalMorphismTS,
    StateSet,
    Transformation,
    TransformationSemigroupoid,
    apply,
    apply_word,
    compose_transformations,
    full_transformation_semigroupoid,
    generate_closure,
    holonomy_seed_morphism,
    image_sets,
    image_typed_semigroupoid,
    pad_with_identities,
    pinhole_typed_semigroupoid,
    sink_completion,
    validate_transformation_semigroupoid,
)

__version__ = "0.1.0"
