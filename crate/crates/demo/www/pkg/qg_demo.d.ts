/* tslint:disable */
/* eslint-disable */

/**
 * Decomposition of a random field into its weighted gradient and curl
 * parts, shown on the plane `x₂ = 0`.
 */
export class HodgeSlice {
    free(): void;
    [Symbol.dispose](): void;
    height(): number;
    constructor(n: number, nz: number, big_lambda: number, seed: bigint);
    /**
     * `‖u‖`, `‖P_λu‖`, `‖P_curl u‖`.
     */
    norms(): Float64Array;
    /**
     * Speed of part 0 (field), 1 (gradient) or 2 (curl) at the cells, top
     * row at the surface. All parts share the colour scale of the field.
     */
    rgba(part: number): Uint8Array;
    width(): number;
}

/**
 * Surface buoyancy evolving under the SQG equation.
 */
export class SqgDemo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * `‖θ‖_{L²}`.
     */
    l2(): number;
    constructor(n: number, amplitude: number, eps: number, seed: bigint);
    rgba(): Uint8Array;
    size(): number;
    step(steps: number): void;
    time(): number;
}

/**
 * Neumann solve with `λ ≡ c` and flux data `cos(m x₁)`, against
 * `e^{-mz/√c}/(m√c)`. Returns `z, computed, exact` triples at the cells.
 */
export function lift_profile(m: number, c: number, nz: number, zmax: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_hodgeslice_free: (a: number, b: number) => void;
    readonly __wbg_sqgdemo_free: (a: number, b: number) => void;
    readonly hodgeslice_height: (a: number) => number;
    readonly hodgeslice_new: (a: number, b: number, c: number, d: bigint) => [number, number, number];
    readonly hodgeslice_norms: (a: number) => [number, number];
    readonly hodgeslice_rgba: (a: number, b: number) => [number, number];
    readonly hodgeslice_width: (a: number) => number;
    readonly lift_profile: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly sqgdemo_l2: (a: number) => number;
    readonly sqgdemo_new: (a: number, b: number, c: number, d: bigint) => [number, number, number];
    readonly sqgdemo_rgba: (a: number) => [number, number];
    readonly sqgdemo_size: (a: number) => number;
    readonly sqgdemo_step: (a: number, b: number) => [number, number];
    readonly sqgdemo_time: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
