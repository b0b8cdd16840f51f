/* tslint:disable */
/* eslint-disable */

/**
 * A computed curve plus its outcome.
 */
export class Trajectory {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    outcome(): string;
    /**
     * Blow-up time, or NaN.
     */
    t_star(): number;
    times(): Float64Array;
    values(): Float64Array;
}

/**
 * `[p_c1, p_0, 1/γ, p_c2]` for each γ in `gammas`, flattened.
 */
export function exponent_curves(n: number, k: number, gammas: Float64Array): Float64Array;

/**
 * `f' + a f = b ∫ (t-s)^{-γ} f^{p1} ds + c f^{p2}`, compressed memory.
 */
export function ode_trajectory(a: number, b: number, c: number, gamma: number, p1: number, p2: number, f0: number, horizon: number): Trajectory;

/**
 * Sup-norm history of the PDE on `ℝ × ℝ` from a Gaussian bump, on a
 * deliberately small grid.
 */
export function pde_sup_series(kappa1: number, kappa2: number, gamma: number, p: number, amplitude: number, horizon: number): Trajectory;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_trajectory_free: (a: number, b: number) => void;
    readonly exponent_curves: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly ode_trajectory: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
    readonly pde_sup_series: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly trajectory_outcome: (a: number) => [number, number];
    readonly trajectory_t_star: (a: number) => number;
    readonly trajectory_times: (a: number) => [number, number];
    readonly trajectory_values: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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
