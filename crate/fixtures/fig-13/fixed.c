int main()
{
int diff;
const double E = 0.000001;
double a;
double b;
double inter;
double subarea = 0;
int n;
int key = 0;
scanf("%lf %lf %d", &a, &b, &n);
inter = (b - a) / n;
while ((key < n) && (((diff * key) + 1) < E))
{
  subarea += 1;
  key++;
}
return 0;
}
