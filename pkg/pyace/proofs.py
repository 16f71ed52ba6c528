import logging
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Tuple
from pyace import params as defaults
from pyace.commitments import Commitment, comm_vec, commit_scalar, is_one_hot
from pyace.encoding import Decoder, Encoder
from pyace.errors import EncodingError, StatementError
from pyace.groups import Element, GroupParams, Scalar
from pyace.randomness import RandomSource
from pyace.signatures import hash_to_scalar

logger = logging.getLogger(__name__)


class Relation(Enum):
    VOTE = "vote"
    RESULT = "result"


@dataclass(frozen=True)
class ProofContext:
    """
    Public proving/verifying context. The setup is transparent, so the proving
    and verifying contexts carry the same data: the params, the relation and a
    domain tag bound to the params digest.
    """
    params: GroupParams
    relation: Relation
    tag: bytes
    params_digest: bytes

    def challenge(self, label: bytes, binding: bytes, *elements: Element) -> Scalar:
        data = Encoder(self.params).blob(self.params_digest).blob(binding).elements(elements).to_bytes()
        return hash_to_scalar(self.params, self.tag + b"/" + label, data)


def nizk_setup(params: GroupParams, relation: Relation) -> Tuple[ProofContext, ProofContext]:
    relation = Relation(relation)
    generators = params.generators
    if len(set(generators)) != len(generators) or not all(params.is_element(g) for g in generators):
        raise StatementError("generators are not distinct subgroup elements")
    ctx = ProofContext(params, relation, params.domain_tag + b"/nizk/" + relation.value.encode(), params.digest())
    return ctx, ctx


def range_bits(bound: int) -> int:
    """
    Bits needed for values in [0, bound], i.e. ceil(log2(bound + 1)), at least one.
    """
    return max(1, bound.bit_length())


def _elements_ok(params: GroupParams, values) -> bool:
    return all(params.is_element(v) for v in values)


def _scalars_ok(params: GroupParams, values) -> bool:
    return all(params.is_scalar(v) for v in values)


class _Serializable:
    """
    Versioned byte form: one format byte followed by the canonical encoding.
    """
    def to_bytes(self, params: GroupParams) -> bytes:
        enc = Encoder(params).uint(defaults.proof_format, 1)
        self.encode(enc)
        return enc.to_bytes()

    @classmethod
    def from_bytes(cls, params: GroupParams, data: bytes):
        dec = Decoder(params, data)
        version = dec.uint(1)
        if version != defaults.proof_format:
            raise EncodingError(f"unsupported proof format {version}")
        proof = cls.decode(dec)
        dec.finish()
        return proof


### Schnorr proof of a discrete log

@dataclass(frozen=True)
class DlogProof(_Serializable):
    commitment: Element
    response: Scalar

    def encode(self, enc: Encoder):
        enc.element(self.commitment).scalar(self.response)

    @classmethod
    def decode(cls, dec: Decoder) -> 'DlogProof':
        return cls(dec.element(), dec.scalar())


def dlog_holds(params: GroupParams, base: Element, target: Element, proof: DlogProof, challenge: Scalar) -> bool:
    """
    Checking equation base^z = a * target^e, without recomputing the challenge.
    """
    if not _elements_ok(params, (proof.commitment, target)) or not params.is_scalar(proof.response):
        return False
    return params.exp(base, proof.response) == params.mul(proof.commitment, params.exp(target, challenge))


def simulate_dlog(params: GroupParams, base: Element, target: Element, challenge: Scalar,
                  rng: RandomSource) -> DlogProof:
    z = rng.scalar(params.q)
    return DlogProof(params.mul(params.exp(base, z), params.exp(target, -challenge)), z)


def prove_dlog(ctx: ProofContext, label: bytes, base: Element, target: Element, witness: Scalar,
               rng: RandomSource, binding: bytes = b"") -> DlogProof:
    params = ctx.params
    if params.exp(base, witness) != target:
        raise StatementError("witness does not open the discrete log statement")
    alpha = rng.scalar(params.q)
    commitment = params.exp(base, alpha)
    e = ctx.challenge(label, binding, base, target, commitment)
    return DlogProof(commitment, (alpha + e * witness) % params.q)


def verify_dlog(ctx: ProofContext, label: bytes, base: Element, target: Element, proof: DlogProof,
                binding: bytes = b"") -> bool:
    if not isinstance(proof, DlogProof) or not ctx.params.is_element(proof.commitment):
        return False
    e = ctx.challenge(label, binding, base, target, proof.commitment)
    return dlog_holds(ctx.params, base, target, proof, e)


### Disjunctive proof that a commitment g^b h^s opens to b in {0, 1}

@dataclass(frozen=True)
class BitProof(_Serializable):
    a0: Element
    a1: Element
    e0: Scalar
    e1: Scalar
    z0: Scalar
    z1: Scalar

    def encode(self, enc: Encoder):
        enc.element(self.a0).element(self.a1)
        enc.scalar(self.e0).scalar(self.e1).scalar(self.z0).scalar(self.z1)

    @classmethod
    def decode(cls, dec: Decoder) -> 'BitProof':
        return cls(dec.element(), dec.element(), dec.scalar(), dec.scalar(), dec.scalar(), dec.scalar())

    @classmethod
    def garbage(cls, params: GroupParams, rng: RandomSource) -> 'BitProof':
        q = params.q
        return cls(params.exp(params.h, rng.scalar(q)), params.exp(params.h, rng.scalar(q)),
                   rng.scalar(q), rng.scalar(q), rng.scalar(q), rng.scalar(q))


def _bit_branches(params: GroupParams, commitment: Element) -> Tuple[Element, Element]:
    return commitment, params.div(commitment, params.g)


def bit_holds(params: GroupParams, commitment: Element, proof: BitProof) -> bool:
    """
    Both branch equations h^z_b = a_b * Y_b^e_b, with Y_0 = C and Y_1 = C / g.
    """
    if not _elements_ok(params, (commitment, proof.a0, proof.a1)):
        return False
    if not _scalars_ok(params, (proof.e0, proof.e1, proof.z0, proof.z1)):
        return False
    y0, y1 = _bit_branches(params, commitment)
    h = params.h
    return (params.exp(h, proof.z0) == params.mul(proof.a0, params.exp(y0, proof.e0))
            and params.exp(h, proof.z1) == params.mul(proof.a1, params.exp(y1, proof.e1)))


def simulate_bit(params: GroupParams, commitment: Element, challenge: Scalar, rng: RandomSource) -> BitProof:
    q = params.q
    e0 = rng.scalar(q)
    e1 = (challenge - e0) % q
    z0, z1 = rng.scalar(q), rng.scalar(q)
    y0, y1 = _bit_branches(params, commitment)
    a0 = params.mul(params.exp(params.h, z0), params.exp(y0, -e0))
    a1 = params.mul(params.exp(params.h, z1), params.exp(y1, -e1))
    return BitProof(a0, a1, e0, e1, z0, z1)


def prove_bit(ctx: ProofContext, commitment: Element, value: int, randomness: Scalar,
              rng: RandomSource, binding: bytes = b"") -> BitProof:
    params = ctx.params
    q = params.q
    if value not in (0, 1):
        raise StatementError(f"bit value must be 0 or 1, got {value}")
    if commit_scalar(params, value, randomness) != commitment:
        raise StatementError("randomness does not open the bit commitment")
    branches = _bit_branches(params, commitment)

    # simulate the false branch, answer the true one honestly
    fake = 1 - value
    e_fake, z_fake = rng.scalar(q), rng.scalar(q)
    a_fake = params.mul(params.exp(params.h, z_fake), params.exp(branches[fake], -e_fake))
    alpha = rng.scalar(q)
    a_real = params.exp(params.h, alpha)
    a = [a_real, a_fake] if value == 0 else [a_fake, a_real]

    e = ctx.challenge(b"bit", binding, commitment, a[0], a[1])
    e_real = (e - e_fake) % q
    z_real = (alpha + e_real * randomness) % q
    if value == 0:
        return BitProof(a[0], a[1], e_real, e_fake, z_real, z_fake)
    return BitProof(a[0], a[1], e_fake, e_real, z_fake, z_real)


def verify_bit(ctx: ProofContext, commitment: Element, proof: BitProof, binding: bytes = b"") -> bool:
    params = ctx.params
    if not isinstance(proof, BitProof) or not bit_holds(params, commitment, proof):
        return False
    e = ctx.challenge(b"bit", binding, commitment, proof.a0, proof.a1)
    return (proof.e0 + proof.e1) % params.q == e


### Range proof by bit decomposition

@dataclass(frozen=True)
class RangeProof(_Serializable):
    bit_commitments: Tuple[Element, ...]
    bit_proofs: Tuple[BitProof, ...]
    recomposition: DlogProof

    def encode(self, enc: Encoder):
        enc.elements(self.bit_commitments)
        for proof in self.bit_proofs:
            proof.encode(enc)
        self.recomposition.encode(enc)

    @classmethod
    def decode(cls, dec: Decoder) -> 'RangeProof':
        commitments = dec.elements()
        proofs = tuple(BitProof.decode(dec) for _ in commitments)
        return cls(commitments, proofs, DlogProof.decode(dec))

    @classmethod
    def garbage(cls, params: GroupParams, bits: int, rng: RandomSource) -> 'RangeProof':
        q = params.q
        return cls(tuple(params.exp(params.h, rng.scalar(q)) for _ in range(bits)),
                   tuple(BitProof.garbage(params, rng) for _ in range(bits)),
                   DlogProof(params.exp(params.h, rng.scalar(q)), rng.scalar(q)))


def _range_binding(params: GroupParams, commitment: Element, bit_commitments: Sequence[Element],
                   binding: bytes) -> bytes:
    return Encoder(params).blob(binding).element(commitment).elements(bit_commitments).to_bytes()


def _recomposed(params: GroupParams, commitment: Element, bit_commitments: Sequence[Element]) -> Element:
    """
    prod_i B_i^(2^i) / D, which equals a power of h when the bits recompose the value.
    """
    weighted = params.prod(params.exp(b, 1 << i) for i, b in enumerate(bit_commitments))
    return params.div(weighted, commitment)


def prove_range(ctx: ProofContext, commitment: Element, value: int, randomness: Scalar, bound: int,
                rng: RandomSource, binding: bytes = b"") -> RangeProof:
    params = ctx.params
    q = params.q
    if not 0 <= value <= bound:
        raise StatementError(f"value {value} outside [0, {bound}]")
    if commit_scalar(params, value, randomness) != commitment:
        raise StatementError("randomness does not open the range commitment")

    bits = [(value >> i) & 1 for i in range(range_bits(bound))]
    blinds = [rng.scalar(q) for _ in bits]
    bit_commitments = tuple(commit_scalar(params, b, s) for b, s in zip(bits, blinds))
    inner = _range_binding(params, commitment, bit_commitments, binding)
    bit_proofs = tuple(prove_bit(ctx, c, b, s, rng, inner + i.to_bytes(4, "big"))
                       for i, (c, b, s) in enumerate(zip(bit_commitments, bits, blinds)))

    witness = (sum(s << i for i, s in enumerate(blinds)) - randomness) % q
    target = _recomposed(params, commitment, bit_commitments)
    recomposition = prove_dlog(ctx, b"recompose", params.h, target, witness, rng, inner)
    return RangeProof(bit_commitments, bit_proofs, recomposition)


def verify_range(ctx: ProofContext, commitment: Element, proof: RangeProof, bound: int,
                 binding: bytes = b"") -> bool:
    params = ctx.params
    if not isinstance(proof, RangeProof):
        return False
    n = range_bits(bound)
    if len(proof.bit_commitments) != n or len(proof.bit_proofs) != n:
        return False
    if not _elements_ok(params, proof.bit_commitments + (commitment,)):
        return False
    inner = _range_binding(params, commitment, proof.bit_commitments, binding)
    for i, (c, bit_proof) in enumerate(zip(proof.bit_commitments, proof.bit_proofs)):
        if not verify_bit(ctx, c, bit_proof, inner + i.to_bytes(4, "big")):
            return False
    target = _recomposed(params, commitment, proof.bit_commitments)
    return verify_dlog(ctx, b"recompose", params.h, target, proof.recomposition, inner)


### AND-composed Schnorr proof that a vector commitment and per-coordinate commitments share one opening

@dataclass(frozen=True)
class LinkProof(_Serializable):
    """
    Knowledge of (x, r, s) with c = h^r prod_k g_k^x_k and e_k = g^x_k h^s_k for every k.
    """
    vector_commitment: Element
    coordinate_commitments: Tuple[Element, ...]
    coordinate_responses: Tuple[Scalar, ...]
    randomness_response: Scalar
    blinding_responses: Tuple[Scalar, ...]

    def encode(self, enc: Encoder):
        enc.element(self.vector_commitment).elements(self.coordinate_commitments)
        enc.scalars(self.coordinate_responses).scalar(self.randomness_response).scalars(self.blinding_responses)

    @classmethod
    def decode(cls, dec: Decoder) -> 'LinkProof':
        return cls(dec.element(), dec.elements(), dec.scalars(), dec.scalar(), dec.scalars())

    @classmethod
    def garbage(cls, params: GroupParams, rng: RandomSource) -> 'LinkProof':
        q, n = params.q, params.n_choices
        return cls(params.exp(params.h, rng.scalar(q)),
                   tuple(params.exp(params.h, rng.scalar(q)) for _ in range(n)),
                   tuple(rng.scalar(q) for _ in range(n)), rng.scalar(q),
                   tuple(rng.scalar(q) for _ in range(n)))


def link_holds(params: GroupParams, c: Element, aux: Sequence[Element], proof: LinkProof,
               challenge: Scalar) -> bool:
    n = params.n_choices
    if len(aux) != n or len(proof.coordinate_commitments) != n:
        return False
    if len(proof.coordinate_responses) != n or len(proof.blinding_responses) != n:
        return False
    if not _elements_ok(params, (c, proof.vector_commitment) + tuple(aux) + proof.coordinate_commitments):
        return False
    if not _scalars_ok(params, proof.coordinate_responses + proof.blinding_responses + (proof.randomness_response,)):
        return False

    lhs = comm_vec(params, proof.coordinate_responses, proof.randomness_response)
    if lhs != params.mul(proof.vector_commitment, params.exp(c, challenge)):
        return False
    for e_k, b_k, z_k, y_k in zip(aux, proof.coordinate_commitments, proof.coordinate_responses,
                                  proof.blinding_responses):
        if commit_scalar(params, z_k, y_k) != params.mul(b_k, params.exp(e_k, challenge)):
            return False
    return True


def simulate_link(params: GroupParams, c: Element, aux: Sequence[Element], challenge: Scalar,
                  rng: RandomSource) -> LinkProof:
    q = params.q
    z = tuple(rng.scalar(q) for _ in aux)
    y = tuple(rng.scalar(q) for _ in aux)
    z_r = rng.scalar(q)
    a = params.mul(comm_vec(params, z, z_r), params.exp(c, -challenge))
    b = tuple(params.mul(commit_scalar(params, z_k, y_k), params.exp(e_k, -challenge))
              for e_k, z_k, y_k in zip(aux, z, y))
    return LinkProof(a, b, z, z_r, y)


def prove_link(ctx: ProofContext, c: Element, aux: Sequence[Element], vector: Sequence[int], r: Scalar,
               blinds: Sequence[Scalar], rng: RandomSource, binding: bytes) -> LinkProof:
    params = ctx.params
    q = params.q
    alphas = tuple(rng.scalar(q) for _ in vector)
    betas = tuple(rng.scalar(q) for _ in vector)
    rho = rng.scalar(q)
    a = comm_vec(params, alphas, rho)
    b = tuple(commit_scalar(params, alpha, beta) for alpha, beta in zip(alphas, betas))
    e = ctx.challenge(b"link", binding, c, *aux, a, *b)
    return LinkProof(a, b,
                     tuple((alpha + e * x) % q for alpha, x in zip(alphas, vector)),
                     (rho + e * r) % q,
                     tuple((beta + e * s) % q for beta, s in zip(betas, blinds)))


def verify_link(ctx: ProofContext, c: Element, aux: Sequence[Element], proof: LinkProof, binding: bytes) -> bool:
    if not isinstance(proof, LinkProof) or not ctx.params.is_element(proof.vector_commitment):
        return False
    if not _elements_ok(ctx.params, proof.coordinate_commitments):
        return False
    e = ctx.challenge(b"link", binding, c, *aux, proof.vector_commitment, *proof.coordinate_commitments)
    return link_holds(ctx.params, c, aux, proof, e)


### Ballot well-formedness

@dataclass(frozen=True)
class ProofVote(_Serializable):
    aux_commitments: Tuple[Element, ...]
    bit_proofs: Tuple[BitProof, ...]
    sum_proof: DlogProof
    link_proof: LinkProof

    def encode(self, enc: Encoder):
        enc.elements(self.aux_commitments)
        for proof in self.bit_proofs:
            proof.encode(enc)
        self.sum_proof.encode(enc)
        self.link_proof.encode(enc)

    @classmethod
    def decode(cls, dec: Decoder) -> 'ProofVote':
        aux = dec.elements()
        bit_proofs = tuple(BitProof.decode(dec) for _ in aux)
        return cls(aux, bit_proofs, DlogProof.decode(dec), LinkProof.decode(dec))

    @classmethod
    def garbage(cls, params: GroupParams, rng: RandomSource) -> 'ProofVote':
        """
        Shape-correct proof with random elements and scalars, as a malicious prover would send.
        """
        q, n = params.q, params.n_choices
        return cls(tuple(params.exp(params.h, rng.scalar(q)) for _ in range(n)),
                   tuple(BitProof.garbage(params, rng) for _ in range(n)),
                   DlogProof(params.exp(params.h, rng.scalar(q)), rng.scalar(q)),
                   LinkProof.garbage(params, rng))


def _vote_binding(params: GroupParams, c: Element, aux: Sequence[Element], voter_id: str, election_id: str) -> bytes:
    return Encoder(params).text(election_id).text(voter_id).element(c).elements(aux).to_bytes()


def _sum_target(params: GroupParams, aux: Sequence[Element]) -> Element:
    return params.div(params.prod(aux), params.g)


def prove_vote(ctx: ProofContext, secrets, share_commitments: Sequence[Commitment], voter_id: str,
               election_id: str, rng: RandomSource) -> ProofVote:
    """
    Proves that the product of the share commitments opens to a one-hot vote.
    The prover refuses false statements.
    """
    params = ctx.params
    q = params.q
    vote = tuple(secrets.vote)
    if len(vote) != params.n_choices or not is_one_hot(vote):
        raise StatementError(f"vote {vote} is not one-hot: statement false")
    if tuple(secrets.commitments(params)) != tuple(share_commitments):
        raise StatementError("share commitments do not match the ballot secrets")
    if tuple(sum(col) % q for col in zip(*secrets.shares)) != vote:
        raise StatementError("shares do not reconstruct the vote")

    c = params.prod(share_commitments)
    r = secrets.total_randomness % q
    blinds = tuple(rng.scalar(q) for _ in vote)
    aux = tuple(commit_scalar(params, v, s) for v, s in zip(vote, blinds))
    binding = _vote_binding(params, c, aux, voter_id, election_id)

    bit_proofs = tuple(prove_bit(ctx, e_k, v, s, rng, binding + k.to_bytes(4, "big"))
                       for k, (e_k, v, s) in enumerate(zip(aux, vote, blinds)))
    sum_proof = prove_dlog(ctx, b"sum", params.h, _sum_target(params, aux), sum(blinds) % q, rng, binding)
    link_proof = prove_link(ctx, c, aux, vote, r, blinds, rng, binding)
    return ProofVote(aux, bit_proofs, sum_proof, link_proof)


def verify_vote(ctx: ProofContext, aggregate_commitment: Commitment, proof: ProofVote, voter_id: str,
                election_id: str) -> bool:
    params = ctx.params
    if ctx.relation is not Relation.VOTE or not isinstance(proof, ProofVote):
        return False
    aux = proof.aux_commitments
    if len(aux) != params.n_choices or len(proof.bit_proofs) != params.n_choices:
        return False
    if not _elements_ok(params, aux + (aggregate_commitment,)):
        return False
    binding = _vote_binding(params, aggregate_commitment, aux, voter_id, election_id)
    for k, (e_k, bit_proof) in enumerate(zip(aux, proof.bit_proofs)):
        if not verify_bit(ctx, e_k, bit_proof, binding + k.to_bytes(4, "big")):
            return False
    if not verify_dlog(ctx, b"sum", params.h, _sum_target(params, aux), proof.sum_proof, binding):
        return False
    return verify_link(ctx, aggregate_commitment, aux, proof.link_proof, binding)


### Result correctness

@dataclass(frozen=True)
class ProofResult(_Serializable):
    candidate_commitments: Tuple[Element, ...]
    link_proof: LinkProof
    range_proofs: Tuple[RangeProof, ...]

    def encode(self, enc: Encoder):
        enc.elements(self.candidate_commitments)
        self.link_proof.encode(enc)
        enc.uint(len(self.range_proofs))
        for proof in self.range_proofs:
            proof.encode(enc)

    @classmethod
    def decode(cls, dec: Decoder) -> 'ProofResult':
        commitments = dec.elements()
        link = LinkProof.decode(dec)
        count = dec.uint()
        if count > len(commitments):
            raise EncodingError("too many range proofs")
        return cls(commitments, link, tuple(RangeProof.decode(dec) for _ in range(count)))

    @classmethod
    def garbage(cls, params: GroupParams, n_v: int, rng: RandomSource) -> 'ProofResult':
        q, n = params.q, params.n_choices
        return cls(tuple(params.exp(params.h, rng.scalar(q)) for _ in range(n)),
                   LinkProof.garbage(params, rng),
                   tuple(RangeProof.garbage(params, range_bits(n_v), rng) for _ in range(n - 1)))


def _result_binding(params: GroupParams, c: Element, winner: int, n_v: int, t: Sequence[Element]) -> bytes:
    return Encoder(params).element(c).uint(winner).uint(n_v).elements(t).to_bytes()


def _difference(params: GroupParams, t: Sequence[Element], winner: int, k: int) -> Element:
    """
    D_k = t_w / t_k / g^strict_k, committing to T[w] - T[k] - strict_k.
    """
    strict = 1 if k < winner else 0
    return params.div(params.div(t[winner], t[k]), params.exp(params.g, strict))


def lowest_argmax(tally: Sequence[int]) -> int:
    best = max(tally)
    return next(k for k, value in enumerate(tally) if value == best)


def prove_result(ctx: ProofContext, tally: Sequence[int], opening: Scalar, c_bot: Commitment, winner: int,
                 n_v: int, rng: RandomSource) -> ProofResult:
    """
    Proves that c_bot opens to a tally whose lowest-index argmax is winner: strict
    dominance over lower indices and weak dominance over higher ones, each as a
    range proof on the difference of per-candidate commitments.
    """
    params = ctx.params
    q, n = params.q, params.n_choices
    tally = tuple(int(t) for t in tally)
    if len(tally) != n or not 0 <= winner < n:
        raise StatementError(f"tally {tally} or winner {winner} has the wrong shape")
    if comm_vec(params, tally, opening) != c_bot:
        raise StatementError("opening does not match the aggregate commitment")
    differences = {k: tally[winner] - tally[k] - (1 if k < winner else 0) for k in range(n) if k != winner}
    if any(not 0 <= d <= n_v for d in differences.values()):
        raise StatementError(f"{winner} is not the lowest-index argmax of the tally")

    blinds = tuple(rng.scalar(q) for _ in tally)
    t = tuple(commit_scalar(params, value, u) for value, u in zip(tally, blinds))
    binding = _result_binding(params, c_bot, winner, n_v, t)
    link_proof = prove_link(ctx, c_bot, t, tally, opening % q, blinds, rng, binding)
    range_proofs = tuple(
        prove_range(ctx, _difference(params, t, winner, k), d, (blinds[winner] - blinds[k]) % q, n_v, rng,
                    binding + k.to_bytes(4, "big"))
        for k, d in differences.items())
    return ProofResult(t, link_proof, range_proofs)


def verify_result(ctx: ProofContext, c_bot: Commitment, winner: int, proof: ProofResult, n_v: int) -> bool:
    params = ctx.params
    n = params.n_choices
    if ctx.relation is not Relation.RESULT or not isinstance(proof, ProofResult):
        return False
    if not 0 <= winner < n or n_v < 0:
        return False
    t = proof.candidate_commitments
    if len(t) != n or len(proof.range_proofs) != n - 1 or not _elements_ok(params, t + (c_bot,)):
        return False
    binding = _result_binding(params, c_bot, winner, n_v, t)
    if not verify_link(ctx, c_bot, t, proof.link_proof, binding):
        return False
    others = [k for k in range(n) if k != winner]
    for k, range_proof in zip(others, proof.range_proofs):
        if not verify_range(ctx, _difference(params, t, winner, k), range_proof, n_v, binding + k.to_bytes(4, "big")):
            logger.debug("comparison against candidate %d failed", k)
            return False
    return True
