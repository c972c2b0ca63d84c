/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_wavetank_free: (a: number, b: number) => void;
export const dispersion_frequency: (a: number, b: number) => number;
export const reconstruction_error: (a: number, b: number) => [number, number, number];
export const wavetank_advance: (a: number, b: number) => [number, number, number];
export const wavetank_elevation: (a: number) => [number, number];
export const wavetank_energy_drift: (a: number) => number;
export const wavetank_new: (a: number, b: number, c: number, d: number) => [number, number, number];
export const wavetank_surface_velocity: (a: number) => [number, number];
export const wavetank_time: (a: number) => number;
export const wavetank_x: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
