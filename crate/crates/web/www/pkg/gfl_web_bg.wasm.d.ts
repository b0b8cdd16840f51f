/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_trajectory_free: (a: number, b: number) => void;
export const exponent_curves: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const ode_trajectory: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
export const pde_sup_series: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const trajectory_outcome: (a: number) => [number, number];
export const trajectory_t_star: (a: number) => number;
export const trajectory_times: (a: number) => [number, number];
export const trajectory_values: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
