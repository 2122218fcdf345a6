// Frozen fixture: a nose-less 60-point layout and the nose produced by
// the backend's centroid-of-centroids completion, for bit-exact checks.
import { Landmarks, Point } from "../src/types.js";

export const NOSELESS_FACE: Landmarks = [[4.499999999999993,61.89999999999999],[5.322389998741734,71.29359900507659],[7.757956008516921,80.32620726837908],[11.713100593451053,88.65070671989383],[17.03582976521575,95.94719151413226],[23.521594026761022,101.93526183236756],[30.92114909477413,106.38479949041846],[38.95013421770969,109.12481125141554],[47.29999999999999,110.05000000000001],[55.64986578229029,109.12481125141557],[63.67885090522585,106.38479949041846],[71.07840597323894,101.93526183236757],[77.56417023478421,95.94719151413227],[82.88689940654893,88.65070671989385],[86.84204399148305,80.32620726837911],[89.27761000125827,71.2935990050766],[90.1,61.90000000000001],[18.409999999999997,38.36],[23.224999999999994,36.5592520925111],[28.039999999999996,36.41410350659304],[32.855,38.058003182751875],[37.669999999999995,39.97955733995896],[56.93,38.36],[61.745,36.5592520925111],[66.56,36.41410350659304],[71.375,38.058003182751875],[76.19,39.97955733995896],null,[19.479999999999997,51.199999999999996],[21.114814528150447,48.05534890023527],[25.394814528150444,46.11184763782093],[30.685185471849547,46.11184763782093],[34.965185471849544,48.05534890023527],[36.599999999999994,51.199999999999996],[34.965185471849544,54.344651099764725],[30.68518547184955,56.28815236217907],[25.394814528150448,56.28815236217907],[21.114814528150447,54.344651099764725],[28.039999999999996,51.199999999999996],[58.0,51.199999999999996],[59.63481452815045,48.05534890023527],[63.914814528150444,46.11184763782093],[69.20518547184955,46.11184763782093],[73.48518547184955,48.05534890023527],[75.12,51.199999999999996],[73.48518547184956,54.344651099764725],[69.20518547184956,56.28815236217907],[63.914814528150444,56.28815236217907],[59.63481452815045,54.344651099764725],[66.56,51.199999999999996],[33.39,87.58000000000001],[36.481111111111105,86.59624693455783],[39.57222222222222,84.54944576978912],[42.66333333333333,83.32141605727506],[45.754444444444445,84.04120265135188],[48.84555555555555,86.04703707689131],[51.93666666666666,87.4947644134318],[55.02777777777777,87.05335082429468],[58.11888888888889,85.12862992764957],[61.209999999999994,83.4901812395668]];

export const EXPECTED_NOSE: Point = [47.29999999999999, 62.64340916316028];
